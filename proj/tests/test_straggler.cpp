// Copyright 2026 The AGC Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "agc/error.hpp"
#include "agc/straggler.hpp"

namespace agc {
namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::kInvalidInput;
}

TEST(StragglerProb, ScalarValues) {
  EXPECT_NEAR(straggler_prob(2.0, 1.1), 0.818731, 1e-6);
  EXPECT_NEAR(straggler_prob(0.1, 1.1), 0.990050, 1e-6);
  EXPECT_DOUBLE_EQ(straggler_prob(5.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(straggler_prob(0.7, 1.3), std::exp(-0.7 * 0.3));
}

TEST(StragglerProb, Errors) {
  EXPECT_EQ(kind_of([] { straggler_prob(1.0, 0.9); }), ErrorKind::kInvalidThreshold);
  EXPECT_EQ(kind_of([] { WorkerProfile::from_latency(1, 5.0, 1.0); }), ErrorKind::kDegenerateWorker);
  EXPECT_EQ(kind_of([] { WorkerProfile::from_probability(1, 1.0); }), ErrorKind::kDegenerateWorker);
}

TEST(SampleProfiles, DefaultRange) {
  Rng rng(1);
  const auto prof = sample_profiles(10, 0.1, 2.0, 1.1, rng);
  ASSERT_EQ(prof.size(), 10u);
  for (const auto& w : prof) {
    EXPECT_GE(w.psi(), 0.1);
    EXPECT_LE(w.psi(), 2.0);
    EXPECT_GE(w.p(), 0.8187);
    EXPECT_LE(w.p(), 0.9901);
    EXPECT_DOUBLE_EQ(w.p(), std::exp(-w.psi() * 0.1));
  }
}

TEST(SampleProfiles, PointDistribution) {
  Rng rng(2);
  const auto prof = sample_profiles(1, 1.0, 1.0, 2.0, rng);
  ASSERT_EQ(prof.size(), 1u);
  EXPECT_DOUBLE_EQ(prof[0].p(), std::exp(-1.0));
}

TEST(SampleProfiles, Deterministic) {
  Rng a(3), b(3);
  const auto pa = probabilities(sample_profiles(10, 0.1, 2.0, 1.1, a));
  const auto pb = probabilities(sample_profiles(10, 0.1, 2.0, 1.1, b));
  EXPECT_EQ(pa, pb);
}

TEST(SampleProfiles, RejectsDegenerateThreshold) {
  Rng rng(4);
  EXPECT_EQ(kind_of([&] { sample_profiles(3, 0.1, 2.0, 1.0, rng); }), ErrorKind::kInvalidThreshold);
}

TEST(Indicators, AllAliveWhenNeverStraggling) {
  Rng rng(5);
  const auto prof = profiles_from_probabilities(std::vector<double>(6, 0.0));
  for (int rep = 0; rep < 50; ++rep) {
    for (bool alive : sample_indicators(prof, rng)) EXPECT_TRUE(alive);
  }
}

TEST(Indicators, OneDrawPerWorker) {
  Rng rng(6);
  const auto prof = profiles_from_probabilities(std::vector<double>{0.1, 0.5, 0.9});
  sample_indicators(prof, rng);
  EXPECT_EQ(rng.counter(), 3u);
}

// E[1_i] = 1 - p_i and pairwise covariances vanish.
TEST(IndicatorsProperty, MeansAndIndependence) {
  constexpr int kN = 100000;
  const std::vector<double> p{0.1, 0.5, 0.8, 0.95};
  const auto prof = profiles_from_probabilities(p);
  Rng rng(7);
  std::vector<double> mean(4, 0.0);
  std::vector<std::vector<double>> joint(4, std::vector<double>(4, 0.0));
  for (int t = 0; t < kN; ++t) {
    const auto a = sample_indicators(prof, rng);
    for (int i = 0; i < 4; ++i) {
      mean[i] += a[i];
      for (int j = 0; j < 4; ++j) joint[i][j] += a[i] && a[j];
    }
  }
  for (int i = 0; i < 4; ++i) {
    mean[i] /= kN;
    EXPECT_NEAR(mean[i], 1.0 - p[i], 4.0 * std::sqrt(p[i] * (1.0 - p[i]) / kN));
  }
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      EXPECT_LT(std::abs(joint[i][j] / kN - mean[i] * mean[j]), 4.0 / std::sqrt(kN));
    }
  }
}

}  // namespace
}  // namespace agc
