// Copyright 2026 The AGC Authors
// SPDX-License-Identifier: Apache-2.0

#include "agc/straggler.hpp"

#include <cmath>
#include <string>

#include "agc/error.hpp"

namespace agc {

double straggler_prob(double psi, double tau_th) {
  if (!(tau_th >= 1.0)) {
    throw Error(ErrorKind::kInvalidThreshold, "tau_th must be >= 1");
  }
  if (!(psi > 0.0) || !std::isfinite(psi)) {
    throw Error(ErrorKind::kInvalidInput, "psi must be a positive finite value");
  }
  return std::exp(-psi * (tau_th - 1.0));
}

WorkerProfile WorkerProfile::from_latency(int id, double psi, double tau_th) {
  const double p = straggler_prob(psi, tau_th);
  if (p >= 1.0) {
    throw Error(ErrorKind::kDegenerateWorker,
                "worker " + std::to_string(id) + " straggles with probability 1");
  }
  return WorkerProfile(id, psi, p);
}

WorkerProfile WorkerProfile::from_probability(int id, double p) {
  if (!(p >= 0.0)) throw Error(ErrorKind::kInvalidInput, "p must be >= 0");
  if (!(p < 1.0)) {
    throw Error(ErrorKind::kDegenerateWorker,
                "worker " + std::to_string(id) + " straggles with probability 1");
  }
  return WorkerProfile(id, 0.0, p);
}

Profiles sample_profiles(std::size_t k, double psi_min, double psi_max, double tau_th,
                         Rng& rng) {
  if (!(tau_th > 1.0)) {
    throw Error(ErrorKind::kInvalidThreshold, "tau_th must be > 1 for a usable model");
  }
  if (!(psi_min > 0.0) || psi_max < psi_min) {
    throw Error(ErrorKind::kInvalidInput, "need 0 < psi_min <= psi_max");
  }
  Profiles out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double psi = rng.uniform(psi_min, psi_max);
    out.push_back(WorkerProfile::from_latency(static_cast<int>(i) + 1, psi, tau_th));
  }
  return out;
}

Profiles profiles_from_probabilities(std::span<const double> p) {
  Profiles out;
  out.reserve(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    out.push_back(WorkerProfile::from_probability(static_cast<int>(i) + 1, p[i]));
  }
  return out;
}

std::vector<double> probabilities(const Profiles& profiles) {
  std::vector<double> p;
  p.reserve(profiles.size());
  for (const auto& w : profiles) p.push_back(w.p());
  return p;
}

std::vector<bool> sample_indicators(const Profiles& profiles, Rng& rng) {
  std::vector<bool> alive(profiles.size());
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    alive[i] = rng.uniform() >= profiles[i].p();
  }
  return alive;
}

}  // namespace agc
