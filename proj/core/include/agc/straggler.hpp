// Copyright 2026 The AGC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "agc/rng.hpp"

namespace agc {

/// One worker's straggling behaviour. p is the per-iteration probability that
/// the worker misses the deadline; p == 1 is rejected at construction.
class WorkerProfile {
 public:
  /// Shifted-exponential latency model: p = exp(-psi (tau_th - 1)).
  static WorkerProfile from_latency(int id, double psi, double tau_th);
  /// Explicit probability, bypassing the latency model. psi is left at 0.
  static WorkerProfile from_probability(int id, double p);

  int id() const { return id_; }
  double psi() const { return psi_; }
  double p() const { return p_; }

 private:
  WorkerProfile(int id, double psi, double p) : id_(id), psi_(psi), p_(p) {}

  int id_;
  double psi_;
  double p_;
};

using Profiles = std::vector<WorkerProfile>;

/// exp(-psi (tau_th - 1)); tau_th < 1 is outside the model.
double straggler_prob(double psi, double tau_th);

/// k profiles with psi ~ Uniform(psi_min, psi_max), ids 1..k.
Profiles sample_profiles(std::size_t k, double psi_min, double psi_max, double tau_th,
                         Rng& rng);

Profiles profiles_from_probabilities(std::span<const double> p);
std::vector<double> probabilities(const Profiles& profiles);

/// Non-straggler indicators: entry i is true with probability 1 - p_i.
/// Consumes exactly one draw per worker.
std::vector<bool> sample_indicators(const Profiles& profiles, Rng& rng);

}  // namespace agc
