// Copyright 2026 The AGC Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <Eigen/Dense>
#include <vector>

#include "agc/bit_alloc.hpp"
#include "agc/code_design.hpp"
#include "agc/quantizer.hpp"
#include "agc/rng.hpp"
#include "agc/sim.hpp"
#include "agc/straggler.hpp"

namespace {

std::vector<double> worker_p(std::size_t k) {
  agc::Rng rng(1);
  return agc::probabilities(agc::sample_profiles(k, 0.1, 2.0, 1.1, rng));
}

// Args: k, Z_res.
void BM_DpAllocate(benchmark::State& state) {
  const auto p = worker_p(static_cast<std::size_t>(state.range(0)));
  const int z = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(agc::dp_allocate(p, 1024, z));
}
BENCHMARK(BM_DpAllocate)->Args({10, 10})->Args({10, 50})->Args({10, 200})->Args({50, 200});

void BM_ProposedAllocate(benchmark::State& state) {
  const auto p = worker_p(static_cast<std::size_t>(state.range(0)));
  const int z = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(agc::proposed_allocate(p, 1024, z));
}
BENCHMARK(BM_ProposedAllocate)->Args({10, 10})->Args({10, 50})->Args({10, 200})->Args({50, 200});

void BM_GreedyAllocate(benchmark::State& state) {
  const auto p = worker_p(static_cast<std::size_t>(state.range(0)));
  const int z = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(agc::greedy_allocate(p, 1024, z));
}
BENCHMARK(BM_GreedyAllocate)->Args({10, 50})->Args({50, 200});

// Args: dim, bit width.
void BM_QuantizePack(benchmark::State& state) {
  agc::Rng rng(2);
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  for (double& v : x) v = rng.normal();
  const int z = static_cast<int>(state.range(1));
  for (auto _ : state) {
    auto bytes = agc::pack(agc::quantize(x, z, rng));
    benchmark::DoNotOptimize(bytes.data());
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0) * 8);
}
BENCHMARK(BM_QuantizePack)->Args({1024, 3})->Args({1024, 8})->Args({65536, 4});

void BM_Unpack(benchmark::State& state) {
  agc::Rng rng(3);
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  for (double& v : x) v = rng.normal();
  const int z = static_cast<int>(state.range(1));
  const auto bytes = agc::pack(agc::quantize(x, z, rng));
  for (auto _ : state) benchmark::DoNotOptimize(agc::unpack(bytes, z, x.size()));
}
BENCHMARK(BM_Unpack)->Args({1024, 3})->Args({65536, 4});

// Args: k, n.
void BM_OptimalDesign(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const auto n = static_cast<std::size_t>(state.range(1));
  agc::Rng rng(4);
  const auto prof = agc::sample_profiles(k, 0.1, 2.0, 1.1, rng);
  const std::vector<int> bits(k, 4);
  for (auto _ : state) benchmark::DoNotOptimize(agc::optimal_design(prof, bits, 32, n, 1.0, rng));
}
BENCHMARK(BM_OptimalDesign)->Args({10, 20})->Args({100, 1000});

// One aggregation round: encode, quantize, straggle, decode. Args: k, dim.
void BM_AggregateStep(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const auto dim = static_cast<std::size_t>(state.range(1));
  const std::size_t n = 2 * k;
  agc::Rng rng(5);
  const auto prof = agc::sample_profiles(k, 0.1, 2.0, 1.1, rng);
  const auto inst = agc::build_scheme(agc::SchemeSpec::parse("proposed"), prof, n, dim,
                                      static_cast<int>(4 * k), 1.0, rng);
  Eigen::MatrixXd g = Eigen::MatrixXd::Random(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(n));
  std::uint64_t it = 0;
  for (auto _ : state) {
    agc::Rng step = agc::Rng::keyed(6, {it++});
    benchmark::DoNotOptimize(agc::aggregate_step(inst, prof, g, nullptr, step));
  }
}
BENCHMARK(BM_AggregateStep)->Args({10, 32})->Args({10, 4096});

}  // namespace

BENCHMARK_MAIN();
