// Copyright 2026 The AGC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <initializer_list>

namespace agc {

/// Counter-based random stream.
///
/// Draw number c of a stream with key K is a fixed bijective hash of (K, c),
/// so a stream can be re-created anywhere from its key alone and results do
/// not depend on the platform's <random> distributions. Substreams are keyed
/// by tuples, e.g. Rng::keyed(seed, {iteration, worker}).
class Rng {
 public:
  explicit Rng(std::uint64_t key) : key_(mix_key(key)) {}

  static Rng keyed(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

  /// Independent child stream; does not advance this stream.
  Rng child(std::uint64_t tag) const;

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller; consumes two draws per call.
  double normal();
  bool bernoulli(double p) { return uniform() < p; }
  /// Uniform integer in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  static std::uint64_t mix_key(std::uint64_t x);

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace agc
