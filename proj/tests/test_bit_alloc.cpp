// Copyright 2026 The AGC Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "agc/bit_alloc.hpp"
#include "agc/error.hpp"
#include "agc/rng.hpp"
#include "agc/straggler.hpp"

namespace agc {
namespace {

// Utility re-derived from the quantizer variance: z = r + 2, s = 2^(z-1) - 1.
double ref_utility(double p, int r, std::size_t dim) {
  const double s = std::pow(2.0, r + 1) - 1.0;
  return (1.0 - p) / (p + static_cast<double>(dim) / (4.0 * s * s));
}

std::vector<double> random_p(std::size_t k, Rng& rng) {
  return probabilities(sample_profiles(k, 0.1, 2.0, 1.1, rng));
}

int total(const std::vector<int>& r) { return std::accumulate(r.begin(), r.end(), 0); }

const std::vector<double> kTwo{0.1, 0.5};

TEST(Utility, ScalarValues) {
  EXPECT_NEAR(utility(0.1, 0, 4), 0.818182, 1e-6);
  EXPECT_NEAR(utility(0.1, 2, 4), 7.474576, 1e-6);
  EXPECT_NEAR(utility(0.5, 1, 4), 0.818182, 1e-6);
}

TEST(Utility, MatchesReferenceFormula) {
  for (double p : {0.0, 0.01, 0.3, 0.9, 0.999}) {
    for (int r = 0; r <= 30; ++r) {
      for (std::size_t dim : {std::size_t{1}, std::size_t{8}, std::size_t{1024}}) {
        EXPECT_NEAR(utility(p, r, dim), ref_utility(p, r, dim), 1e-13 * ref_utility(p, r, dim));
      }
    }
  }
}

TEST(Utility, DecreasingInP) {
  for (int r = 0; r < 10; ++r) {
    for (double p = 0.0; p < 0.95; p += 0.05) EXPECT_LT(utility(p + 0.01, r, 64), utility(p, r, 64));
  }
}

// Marginal gains rise then fall for l >= 8.
TEST(Utility, MarginalGainsUnimodal) {
  for (std::size_t dim : {std::size_t{8}, std::size_t{64}, std::size_t{1024}}) {
    for (double p : {0.05, 0.5, 0.9}) {
      std::vector<double> gain;
      for (int r = 0; r <= 20; ++r) gain.push_back(utility(p, r + 1, dim) - utility(p, r, dim));
      std::size_t peak = 0;
      while (peak + 1 < gain.size() && gain[peak + 1] > gain[peak]) ++peak;
      for (std::size_t r = peak; r + 1 < gain.size(); ++r) EXPECT_LE(gain[r + 1], gain[r]);
    }
  }
}

TEST(Dp, TwoWorkerExample) {
  const auto a = dp_allocate(kTwo, 4, 2);
  EXPECT_EQ(a.residual, (std::vector<int>{2, 0}));
  EXPECT_NEAR(a.objective, 7.807910, 1e-6);
  EXPECT_EQ(a.bit_widths(), (std::vector<int>{4, 2}));
}

TEST(Dp, Boundaries) {
  Rng rng(1);
  const auto p = random_p(5, rng);
  const auto zero = dp_allocate(p, 32, 0);
  EXPECT_EQ(zero.residual, std::vector<int>(5, 0));
  double sum = 0.0;
  for (double q : p) sum += utility(q, 0, 32);
  EXPECT_DOUBLE_EQ(zero.objective, sum);
  for (int z : {0, 1, 7, 40}) EXPECT_EQ(dp_allocate(std::vector<double>{0.3}, 16, z).residual, std::vector<int>{z});
}

TEST(Dp, Errors) {
  try {
    dp_allocate(kTwo, 4, -1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInfeasibleBudget);
  }
  try {
    dp_allocate(std::vector<double>{0.2, 1.0}, 4, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerateWorker);
  }
}

TEST(Exhaustive, ExampleAndLimits) {
  EXPECT_NEAR(exhaustive_oracle(kTwo, 4, 2).objective, 7.807910, 1e-6);
  EXPECT_EQ(exhaustive_oracle(kTwo, 4, 0).residual, (std::vector<int>{0, 0}));
  try {
    exhaustive_oracle(std::vector<double>(12, 0.5), 4, 60);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInstanceTooLarge);
  }
}

TEST(EqualAllocate, Examples) {
  EXPECT_EQ(equal_allocate(3, 7), (std::vector<int>{3, 2, 2}));
  EXPECT_EQ(equal_allocate(3, 6), (std::vector<int>{2, 2, 2}));
  EXPECT_EQ(equal_allocate(4, 0), std::vector<int>(4, 0));
}

TEST(Lagrangian, SymmetricSplitAndSingleWorker) {
  const auto sym = lagrangian_allocate(std::vector<double>(4, 0.4), 64, 12);
  EXPECT_EQ(sym.residual, std::vector<int>(4, 3));
  EXPECT_FALSE(sym.fallback);
  EXPECT_EQ(lagrangian_allocate(std::vector<double>{0.7}, 64, 9).residual, std::vector<int>{9});
}

TEST(Lagrangian, PreservesBudget) {
  Rng rng(2);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t k = 1 + rng.below(12);
    const int z = static_cast<int>(rng.below(80));
    const auto a = lagrangian_allocate(random_p(k, rng), 1 + rng.below(2048), z);
    EXPECT_EQ(total(a.residual), z);
    for (int r : a.residual) EXPECT_GE(r, 0);
  }
}

TEST(LocalSearch, SingleSwapExample) {
  EXPECT_EQ(local_search_refine({1, 1}, kTwo, 4), (std::vector<int>{2, 0}));
}

TEST(LocalSearch, OptimumIsFixedPoint) {
  Rng rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    const auto p = random_p(6, rng);
    const auto best = dp_allocate(p, 128, 20);
    const auto r = local_search_refine(best.residual, p, 128);
    EXPECT_DOUBLE_EQ(allocation_objective(p, r, 128), best.objective);
  }
}

TEST(Proposed, TwoWorkerExample) {
  const auto a = proposed_allocate(kTwo, 4, 2);
  EXPECT_EQ(a.residual, (std::vector<int>{2, 0}));
  EXPECT_NEAR(a.objective, 7.807910, 1e-6);
  EXPECT_EQ(proposed_allocate(kTwo, 4, 0).residual, (std::vector<int>{0, 0}));
}

TEST(Greedy, BudgetAndOptimalityGap) {
  EXPECT_EQ(greedy_allocate(kTwo, 4, 0).residual, (std::vector<int>{0, 0}));
  Rng rng(8);
  for (int rep = 0; rep < 50; ++rep) {
    const auto p = random_p(1 + rng.below(8), rng);
    const int z = static_cast<int>(rng.below(40));
    const auto a = greedy_allocate(p, 64, z);
    EXPECT_EQ(total(a.residual), z);
    EXPECT_DOUBLE_EQ(a.objective, allocation_objective(p, a.residual, 64));
    EXPECT_LE(a.objective, dp_allocate(p, 64, z).objective * (1.0 + 1e-12));
  }
}

TEST(AllocProperty, DpEqualsExhaustive) {
  for (std::size_t k = 1; k <= 4; ++k) {
    for (int z = 0; z <= 12; ++z) {
      for (std::uint64_t s = 0; s < 10; ++s) {
        Rng rng = Rng::keyed(4, {k, static_cast<std::uint64_t>(z), s});
        const auto p = random_p(k, rng);
        for (std::size_t dim : {std::size_t{4}, std::size_t{36}, std::size_t{1024}}) {
          EXPECT_EQ(dp_allocate(p, dim, z).objective, exhaustive_oracle(p, dim, z).objective);
        }
      }
    }
  }
}

TEST(AllocProperty, BudgetMonotone) {
  Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const auto p = random_p(6, rng);
    double prev = -1.0;
    for (int z = 0; z <= 40; ++z) {
      const double f = dp_allocate(p, 256, z).objective;
      EXPECT_GE(f, prev);
      prev = f;
    }
  }
}

TEST(AllocProperty, ProposedBetweenEqualAndOptimum) {
  Rng rng(6);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t k = 1 + rng.below(12);
    const int z = static_cast<int>(rng.below(60));
    const std::size_t dim = 1 + rng.below(2048);
    const auto p = random_p(k, rng);
    const auto a = proposed_allocate(p, dim, z);
    EXPECT_EQ(total(a.residual), z);
    EXPECT_DOUBLE_EQ(a.objective, allocation_objective(p, a.residual, dim));
    EXPECT_LE(a.objective, dp_allocate(p, dim, z).objective * (1.0 + 1e-12));
    EXPECT_GE(a.objective, equal_allocation(p, dim, z).objective * (1.0 - 1e-12));
  }
}

TEST(AllocProperty, ProposedAtLeastAsGoodAsGreedyMostly) {
  int wins = 0;
  constexpr int kCases = 200;
  for (int s = 0; s < kCases; ++s) {
    Rng rng = Rng::keyed(7, {static_cast<std::uint64_t>(s)});
    const auto p = random_p(10, rng);
    const int z = s % 2 == 0 ? 10 : 50;
    if (proposed_allocate(p, 1024, z).objective >= greedy_allocate(p, 1024, z).objective * (1.0 - 1e-12)) ++wins;
  }
  EXPECT_GE(wins, kCases * 9 / 10);
}

}  // namespace
}  // namespace agc
