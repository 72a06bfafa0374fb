// Copyright 2026 The AGC Authors
// SPDX-License-Identifier: Apache-2.0

#include "agc/rng.hpp"

#include <cmath>
#include <numbers>

namespace agc {
namespace {

// SplitMix64 finalizer.
std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// MurmurHash3 fmix64; a second, unrelated bijection for the counter.
std::uint64_t fmix(std::uint64_t k) {
  k ^= k >> 33;
  k *= 0xff51afd7ed558ccdULL;
  k ^= k >> 33;
  k *= 0xc4ceb9fe1a85ec53ULL;
  k ^= k >> 33;
  return k;
}

}  // namespace

std::uint64_t Rng::mix_key(std::uint64_t x) { return splitmix(x ^ 0x6a09e667f3bcc909ULL); }

Rng Rng::keyed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  Rng r(seed);
  for (std::uint64_t p : path) r = r.child(p);
  return r;
}

Rng Rng::child(std::uint64_t tag) const {
  Rng r(0);
  r.key_ = splitmix(key_ ^ fmix(tag + 0x3c6ef372fe94f82bULL));
  return r;
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t c = counter_++;
  return splitmix(key_ ^ fmix(c));
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Lemire's multiply-shift with rejection.
  std::uint64_t x = next_u64();
  __uint128_t m = static_cast<__uint128_t>(x) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      x = next_u64();
      m = static_cast<__uint128_t>(x) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace agc
