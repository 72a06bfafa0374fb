// Copyright 2026 The AGC Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "agc/baselines.hpp"
#include "agc/error.hpp"
#include "agc/quantizer.hpp"
#include "agc/sim.hpp"

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

Profiles random_profiles(std::size_t k, Rng& rng) { return sample_profiles(k, 0.1, 2.0, 1.1, rng); }

Eigen::MatrixXd random_grads(std::size_t dim, std::size_t n, Rng& rng) {
  Eigen::MatrixXd g(dim, n);
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index t = 0; t < g.rows(); ++t) g(t, j) = rng.normal();
  }
  return g;
}

// Column j's expected weight sum_i (1 - p_i) w_i a_ij, from the dense matrix.
std::vector<double> expected_weights(const CodeDesign& d) {
  const auto dense = d.encoding.to_dense();
  std::vector<double> out(d.n, 0.0);
  for (std::size_t i = 0; i < d.k; ++i) {
    for (std::size_t j = 0; j < d.n; ++j) out[j] += (1.0 - d.p[i]) * d.decoder[i] * dense[i][j];
  }
  return out;
}

TEST(SchemeSpec, ParsesNamesAndParameters) {
  EXPECT_EQ(SchemeSpec::parse("proposed").kind, SchemeKind::kProposed);
  EXPECT_EQ(SchemeSpec::parse("IDEAL_SGD").kind, SchemeKind::kIdealSgd);
  EXPECT_EQ(SchemeSpec::parse("is_sgd").kind, SchemeKind::kIsSgd);
  EXPECT_EQ(SchemeSpec::parse("osgc_equalbits").kind, SchemeKind::kOsgcEqualBits);
  const auto bgc = SchemeSpec::parse("bgc:d=3.5");
  EXPECT_EQ(bgc.kind, SchemeKind::kBgc);
  EXPECT_DOUBLE_EQ(bgc.d, 3.5);
  EXPECT_EQ(SchemeSpec::parse("sgc:d=2").d, 2.0);
  EXPECT_EQ(SchemeSpec::parse("sgc").name(), "sgc:d=2");
  EXPECT_EQ(bgc.name(), "bgc:d=3.5");
  EXPECT_EQ(SchemeSpec::parse(bgc.name()), bgc);
  EXPECT_EQ(SchemeSpec::parse("proposed").name(), "proposed");
}

TEST(SchemeSpec, Rejections) {
  EXPECT_EQ(kind_of([] { SchemeSpec::parse("ehd"); }), ErrorKind::kConfig);
  EXPECT_EQ(kind_of([] { SchemeSpec::parse("od"); }), ErrorKind::kConfig);
  EXPECT_EQ(kind_of([] { SchemeSpec::parse("fancy"); }), ErrorKind::kConfig);
  EXPECT_EQ(kind_of([] { SchemeSpec::parse("bgc:d=x"); }), ErrorKind::kConfig);
  EXPECT_EQ(kind_of([] { SchemeSpec::parse("bgc:q=1"); }), ErrorKind::kConfig);
  EXPECT_EQ(kind_of([] { SchemeSpec::parse("proposed:d=2"); }), ErrorKind::kConfig);
  EXPECT_EQ(kind_of([] { SchemeSpec::parse("bgc:d=11").validate(10); }), ErrorKind::kConfig);
  EXPECT_EQ(kind_of([] { SchemeSpec::parse("sgc:d=1.5").validate(10); }), ErrorKind::kConfig);
  EXPECT_NO_THROW(SchemeSpec::parse("bgc:d=10").validate(10));
}

TEST(IsSgd, IdentityWhenKEqualsN) {
  Rng rng(1);
  const auto prof = random_profiles(6, rng);
  const auto d = issgd_design(prof, 6);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(d.encoding.at(i, j), i == j ? 1.0 : 0.0);
  }
  EXPECT_DOUBLE_EQ(d.load(), 1.0);
  EXPECT_EQ(kind_of([&] { issgd_design(prof, 5); }), ErrorKind::kInfeasible);
}

TEST(IsSgd, ExactWithoutStragglers) {
  const auto prof = profiles_from_probabilities(std::vector<double>(4, 0.0));
  const auto d = issgd_design(prof, 11);
  EXPECT_DOUBLE_EQ(d.load(), 1.0);
  EXPECT_LT(unbiasedness_residual(d), 1e-15);
  Rng rng(2);
  const auto g = random_grads(5, 11, rng);
  const auto est = monte_carlo_residual(d, {}, g, 10, rng, NoiseSource::kFull);
  EXPECT_LT(est.mean_sq_error, 1e-24 * g.rowwise().sum().squaredNorm());
}

TEST(Bgc, FullRateGivesAllOnes) {
  Rng rng(3);
  const auto prof = random_profiles(5, rng);
  const auto d = bgc_design(prof, 8, 5.0, rng);
  EXPECT_EQ(d.encoding.nnz(), 40u);
  for (double w : d.decoder) EXPECT_EQ(w, 1.0);
}

TEST(Bgc, MeanLoadMatchesRate) {
  Rng rng(4);
  const auto prof = random_profiles(10, rng);
  double load = 0.0;
  constexpr int kReps = 400;
  for (int r = 0; r < kReps; ++r) load += bgc_design(prof, 50, 2.0, rng).load();
  // Var(load) = k q (1 - q) / n per design with q = d / k.
  EXPECT_NEAR(load / kReps, 2.0, 4.0 * std::sqrt(10 * 0.2 * 0.8 / 50.0 / kReps));
}

TEST(Sgc, SingleCopyNoStragglers) {
  const auto prof = profiles_from_probabilities(std::vector<double>(3, 0.0));
  const auto d = sgc_design(prof, 7, 1);
  EXPECT_DOUBLE_EQ(d.load(), 1.0);
  EXPECT_LT(unbiasedness_residual(d), 1e-15);
  for (std::size_t i = 0; i < 3; ++i) {
    for (const auto& e : d.encoding.row(i)) EXPECT_EQ(e.value, 1.0);
  }
}

TEST(Sgc, LoadIsMeanReplication) {
  Rng rng(5);
  const auto prof = random_profiles(6, rng);
  const std::vector<int> copies{1, 2, 3, 2, 6, 1, 1};
  const auto d = sgc_design(prof, 7, copies);
  EXPECT_NEAR(d.load(), 16.0 / 7.0, 1e-15);
  EXPECT_LT(unbiasedness_residual(d), 1e-12);
  const std::vector<int> too_many{7, 1, 1, 1, 1, 1, 1};
  EXPECT_EQ(kind_of([&] { sgc_design(prof, 7, too_many); }), ErrorKind::kInfeasible);
}

TEST(EqualBits, RemainderToMostReliable) {
  const auto prof = profiles_from_probabilities(std::vector<double>{0.9, 0.2, 0.5, 0.2});
  EXPECT_EQ(equal_bit_widths(prof, 10), (std::vector<int>{2, 3, 2, 3}));
  EXPECT_EQ(equal_bit_widths(prof, 12), std::vector<int>(4, 3));
  EXPECT_EQ(kind_of([&] { equal_bit_widths(prof, 7); }), ErrorKind::kInfeasibleBudget);
}

TEST(Osgc, MatchesMatchedDesignForEqualWorkers) {
  const auto prof = profiles_from_probabilities(std::vector<double>(4, 0.3));
  Rng a(6), b(6);
  const auto osgc = osgc_equalbits_design(prof, 9, 16, a);
  const auto matched = optimal_design(prof, std::vector<int>(4, 4), 32, 9, 1.0, b);
  EXPECT_EQ(osgc.bit_widths, std::vector<int>(4, 4));
  const auto da = osgc.design.alpha.to_dense();
  const auto db = matched.alpha.to_dense();
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 9; ++j) EXPECT_NEAR(da[i][j], db[i][j], 1e-14);
  }
}

TEST(Proposed, BudgetAndDesign) {
  Rng rng(7);
  const auto prof = random_profiles(10, rng);
  const auto q = proposed_design(prof, 20, 40, 64, 1.0, rng);
  int sum = 0;
  for (int z : q.bit_widths) {
    EXPECT_GE(z, 2);
    sum += z;
  }
  EXPECT_EQ(sum, 40);
  EXPECT_LT(unbiasedness_residual(q.design), 1e-12);
  EXPECT_EQ(kind_of([&] { proposed_design(prof, 20, 19, 64, 1.0, rng); }), ErrorKind::kInfeasibleBudget);
}

TEST(ExpectedBias, ClosedForm) {
  Rng rng(8);
  const auto prof = random_profiles(4, rng);
  const auto d = bgc_design(prof, 6, 2.0, rng);
  const auto g = random_grads(3, 6, rng);
  std::vector<double> flat(18);
  for (int j = 0; j < 6; ++j) {
    for (int t = 0; t < 3; ++t) flat[j * 3 + t] = g(t, j);
  }
  const auto bias = expected_bias(d, flat, 3);
  const auto w = expected_weights(d);
  for (int t = 0; t < 3; ++t) {
    double want = 0.0;
    for (int j = 0; j < 6; ++j) want += (w[j] - 1.0) * g(t, j);
    EXPECT_NEAR(bias[t], want, 1e-12);
  }
}

// Monte Carlo bias against the closed form: zero for the unbiased schemes,
// sum_j (weight_j - 1) g_j for IS-SGD and BGC.
TEST(BaselineProperty, BiasMatchesClosedForm) {
  constexpr std::size_t kDraws = 40000;
  constexpr std::size_t kDim = 4;
  constexpr std::size_t kN = 12;
  Rng rng(9);
  const auto prof = random_profiles(6, rng);
  const auto g = random_grads(kDim, kN, rng);
  struct Case {
    CodeDesign design;
    std::vector<int> bits;
    bool unbiased;
  };
  std::vector<Case> cases;
  cases.push_back({issgd_design(prof, kN), {}, false});
  cases.push_back({bgc_design(prof, kN, 2.0, rng), {}, false});
  cases.push_back({sgc_design(prof, kN, 2), {}, true});
  auto q = proposed_design(prof, kN, 24, kDim, 1.0, rng);
  cases.push_back({q.design, q.bit_widths, true});
  for (const auto& c : cases) {
    const auto est = monte_carlo_residual(c.design, c.bits, g, kDraws, rng, NoiseSource::kFull);
    const auto w = expected_weights(c.design);
    for (std::size_t t = 0; t < kDim; ++t) {
      double want = 0.0;
      for (std::size_t j = 0; j < kN; ++j) want += (w[j] - 1.0) * g(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j));
      if (c.unbiased) EXPECT_NEAR(want, 0.0, 1e-12);
      EXPECT_LE(std::abs(est.bias[t] - want), 4.0 * est.bias_se[t] + 1e-12);
    }
    if (!c.unbiased) {
      double gap = 0.0;
      for (double v : w) gap = std::max(gap, std::abs(v - 1.0));
      EXPECT_GT(gap, 0.01);
    }
  }
}

}  // namespace
}  // namespace agc
