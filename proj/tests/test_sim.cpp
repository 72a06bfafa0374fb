// Copyright 2026 The AGC Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "agc/error.hpp"
#include "agc/quantizer.hpp"
#include "agc/sim.hpp"

namespace agc {
namespace {

Eigen::VectorXd random_point(std::size_t dim, Rng& rng, double scale = 1.0) {
  Eigen::VectorXd b(dim);
  for (Eigen::Index t = 0; t < b.size(); ++t) b(t) = scale * rng.normal();
  return b;
}

// Central differences of the loss against the analytic gradient.
void expect_gradient_matches(const LossModel& loss, Rng& rng) {
  constexpr double kH = 1e-5;
  for (int rep = 0; rep < 5; ++rep) {
    const auto beta = random_point(loss.dim(), rng, 0.5);
    const Eigen::VectorXd g = loss.gradient(beta);
    for (std::size_t t = 0; t < loss.dim(); ++t) {
      Eigen::VectorXd up = beta, down = beta;
      up(static_cast<Eigen::Index>(t)) += kH;
      down(static_cast<Eigen::Index>(t)) -= kH;
      const double fd = (loss.loss(up) - loss.loss(down)) / (2.0 * kH);
      EXPECT_NEAR(fd, g(static_cast<Eigen::Index>(t)), 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
}

TrainConfig gd_config(const SchemeSpec& scheme, const Profiles& prof, int z_tot, double gamma,
                      std::size_t iterations) {
  TrainConfig c;
  c.scheme = scheme;
  c.profiles = prof;
  c.z_tot = z_tot;
  c.iterations = iterations;
  c.lr = LrSchedule{Schedule::kFixed, gamma};
  c.seed = 17;
  c.trials = 1;
  return c;
}

TEST(LossModel, QuadraticGradientMatchesFiniteDifferences) {
  Rng rng(1);
  const auto loss = LossModel::make_quadratic(6, 5, 1.0, rng);
  expect_gradient_matches(loss, rng);
}

TEST(LossModel, LogisticGradientMatchesFiniteDifferences) {
  Rng rng(2);
  const auto loss = LossModel::make_logistic(4, 5, 6, rng, 0.3);
  expect_gradient_matches(loss, rng);
}

TEST(LossModel, IdentityQuadratic) {
  const auto loss = LossModel::quadratic({Eigen::MatrixXd::Identity(3, 3)}, {Eigen::VectorXd::Zero(3)});
  ASSERT_TRUE(loss.optimum().has_value());
  EXPECT_NEAR(loss.optimum()->norm(), 0.0, 1e-15);
  EXPECT_NEAR(loss.strong_convexity(), 1.0, 1e-12);
  EXPECT_NEAR(loss.smoothness(), 1.0, 1e-12);
  Eigen::VectorXd b(3);
  b << 1.0, 2.0, 2.0;
  EXPECT_DOUBLE_EQ(loss.loss(b), 4.5);
}

TEST(LossModel, RandomQuadraticConditioning) {
  Rng rng(3);
  for (double lam : {0.5, 1.0, 4.0}) {
    const auto loss = LossModel::make_quadratic(20, 8, lam, rng);
    EXPECT_NEAR(loss.strong_convexity(), lam, 1e-9 * lam);
    EXPECT_LT(loss.smoothness() / loss.strong_convexity(), 2.0);
    ASSERT_TRUE(loss.optimum().has_value());
    EXPECT_LT(loss.gradient(*loss.optimum()).norm(), 1e-9);
  }
}

TEST(LossModel, PartitionGradientsSumToGradient) {
  Rng rng(4);
  const auto quad = LossModel::make_quadratic(7, 4, 1.0, rng);
  const auto logi = LossModel::make_logistic(7, 4, 3, rng, 0.2);
  for (const auto* loss : {&quad, &logi}) {
    const auto beta = random_point(4, rng);
    const Eigen::MatrixXd g = loss->partition_gradients(beta);
    EXPECT_EQ(g.cols(), 7);
    EXPECT_LT((g.rowwise().sum() - loss->gradient(beta)).norm(), 1e-12);
    double parts = 0.0;
    for (std::size_t j = 0; j < 7; ++j) parts += loss->partition_loss(j, beta);
    EXPECT_NEAR(parts, loss->loss(beta), 1e-12 * std::max(1.0, std::abs(parts)));
  }
  EXPECT_DOUBLE_EQ(logi.strong_convexity(), 0.2);
}

TEST(LossModel, SampledGradientIsUnbiased) {
  Rng rng(5);
  const auto loss = LossModel::make_quadratic(3, 3, 1.0, rng);
  const auto beta = random_point(3, rng);
  Eigen::VectorXd exact(3), draw(3);
  loss.partition_gradient(1, beta, exact);
  constexpr int kDraws = 20000;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(3), sq = Eigen::VectorXd::Zero(3);
  for (int d = 0; d < kDraws; ++d) {
    loss.sampled_partition_gradient(1, beta, 2, rng, draw);
    sum += draw;
    sq += draw.cwiseProduct(draw);
  }
  for (Eigen::Index t = 0; t < 3; ++t) {
    const double mean = sum(t) / kDraws;
    const double se = std::sqrt((sq(t) / kDraws - mean * mean) / (kDraws - 1));
    EXPECT_LE(std::abs(mean - exact(t)), 4.0 * se + 1e-12);
  }
  EXPECT_THROW(loss.sampled_partition_gradient(1, beta, 0, rng, draw), Error);
}

TEST(CalibrateC, ExampleAndFloor) {
  const auto loss = LossModel::quadratic({Eigen::MatrixXd::Identity(1, 1)}, {Eigen::VectorXd::Constant(1, 2.0)});
  const std::vector<Eigen::VectorXd> origin{Eigen::VectorXd::Zero(1)};
  EXPECT_NEAR(calibrate_C(loss, origin), 4.4, 1e-12);
  const std::vector<Eigen::VectorXd> at_opt{Eigen::VectorXd::Constant(1, 2.0)};
  EXPECT_EQ(calibrate_C(loss, at_opt), 1e-12);
  EXPECT_THROW(calibrate_C(loss, std::vector<Eigen::VectorXd>{}), Error);
}

TEST(LrSchedule, Rates) {
  EXPECT_DOUBLE_EQ((LrSchedule{Schedule::kInvLambdaT, 0.0}.rate(3, 100, 0.5)), 0.5);
  EXPECT_DOUBLE_EQ((LrSchedule{Schedule::kConstSqrt, 0.0}.rate(7, 99, 1.0)), 0.1);
  EXPECT_DOUBLE_EQ((LrSchedule{Schedule::kDecaySqrt, 0.0}.rate(3, 99, 1.0)), 0.5);
  EXPECT_DOUBLE_EQ((LrSchedule{Schedule::kFixed, 0.25}.rate(9, 99, 1.0)), 0.25);
  EXPECT_THROW((LrSchedule{Schedule::kInvLambdaT, 0.0}.rate(0, 10, 0.0)), Error);
}

TEST(Bounds, Arithmetic) {
  const std::vector<double> cost{1.0, 1.0};  // sum c^-1 = 2
  EXPECT_DOUBLE_EQ(strongly_convex_bound(cost, 3, 2.0, 0.5, 10), 4.0 * 9 * 2 * 1.5 / (0.25 * 10));
  EXPECT_DOUBLE_EQ(smooth_const_bound(cost, 3, 2.0, 4.0, 6.0, 8), 2.0 + 4.0 * 9 * 2 * 1.5 / 6.0);
  EXPECT_NEAR(smooth_decay_bound(cost, 3, 2.0, 4.0, 6.0, 8), 2.0 + 4.0 * 9 * 2 * (1.0 + std::log(3.0)) * 1.5 / 3.0,
              1e-12);
}

TEST(Aggregate, IdealSumsAndChargesFullPrecision) {
  Rng rng(6);
  const auto prof = sample_profiles(4, 0.1, 2.0, 1.1, rng);
  const auto inst = build_scheme(SchemeSpec::parse("ideal_sgd"), prof, 5, 3, 0, 1.0, rng);
  Eigen::MatrixXd g(3, 5);
  g.setRandom();
  const auto agg = aggregate_step(inst, prof, g, nullptr, rng);
  EXPECT_LT((agg.first - g.rowwise().sum()).norm(), 1e-15);
  EXPECT_EQ(agg.bits, 4u * 32u * 3u);
}

TEST(Aggregate, BitsFollowWidthsWithoutStragglers) {
  const auto prof = profiles_from_probabilities(std::vector<double>(5, 0.0));
  Rng rng(7);
  const auto inst = build_scheme(SchemeSpec::parse("proposed"), prof, 10, 16, 30, 1.0, rng);
  Eigen::MatrixXd g(16, 10);
  g.setRandom();
  std::uint64_t want = 0;
  for (std::size_t i = 0; i < 5; ++i) {
    if (!inst.design->encoding.row(i).empty()) want += 32u + 16u * static_cast<unsigned>(inst.bit_widths[i]);
  }
  const auto agg = aggregate_step(inst, prof, g, nullptr, rng);
  EXPECT_EQ(agg.bits, want);
  EXPECT_EQ(agg.stragglers, 0u);
}

TEST(Aggregate, AllStragglersGiveZeroUpdate) {
  const double almost_one = std::nextafter(1.0, 0.0);
  const auto prof = profiles_from_probabilities(std::vector<double>(4, almost_one));
  const auto live = profiles_from_probabilities(std::vector<double>(4, 0.5));
  Rng rng(8);
  const auto inst = build_scheme(SchemeSpec::parse("sgc:d=2"), live, 6, 3, 0, 1.0, rng);
  Eigen::MatrixXd g(3, 6);
  g.setRandom();
  const auto agg = aggregate_step(inst, prof, g, nullptr, rng);
  EXPECT_EQ(agg.stragglers, 4u);
  EXPECT_EQ(agg.bits, 0u);
  EXPECT_EQ(agg.first.norm(), 0.0);
}

TEST(Adam, FirstStepIsSignLike) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd g(3);
  g << 2.0, -0.5, 0.0;
  AdamState st;
  OptimizerConfig hyper;
  hyper.eps = 0.0;
  adam_step_two_track(beta, st, g, g, 0.1, hyper);
  EXPECT_NEAR(beta(0), -0.1, 1e-12);
  EXPECT_NEAR(beta(1), 0.1, 1e-12);
  EXPECT_TRUE(std::isnan(beta(2)));
  EXPECT_EQ(st.step, 1u);
}

TEST(Adam, LargeLambdaMatchesSingleTrack) {
  Rng rng(9);
  const auto loss = LossModel::make_quadratic(10, 4, 1.0, rng);
  const auto prof = sample_profiles(5, 0.1, 2.0, 1.1, rng);
  auto cfg = gd_config(SchemeSpec::parse("proposed"), prof, 40, 0.01, 50);
  cfg.optimizer.kind = OptimizerKind::kAdam;
  const auto inst = build_scheme(cfg.scheme, prof, 10, 4, 40, 1.0, rng);
  const auto v = two_track_decoder(*inst.design, inst.phi, 1e12);
  TrainState two, single;
  two.beta = single.beta = Eigen::VectorXd::Zero(4);
  for (std::uint64_t t = 0; t < 50; ++t) {
    Rng a = Rng::keyed(3, {t});
    Rng b = Rng::keyed(3, {t});
    train_step(two, inst, prof, loss, cfg, loss.partition_gradients(two.beta), &v, a);
    train_step(single, inst, prof, loss, cfg, loss.partition_gradients(single.beta), nullptr, b);
    ASSERT_LT((two.beta - single.beta).norm(), 1e-6) << "t=" << t;
  }
}

TEST(MonteCarlo, HighPrecisionNoStragglersIsNearExact) {
  const auto prof = profiles_from_probabilities(std::vector<double>(4, 0.0));
  Rng rng(10);
  const std::vector<int> bits(4, 24);
  const auto design = optimal_design(prof, bits, 6, 8, 1.0, rng);
  Eigen::MatrixXd g(6, 8);
  g.setRandom();
  const auto est = monte_carlo_residual(design, bits, g, 200, rng);
  EXPECT_LT(est.mean_sq_error, 1e-6 * g.rowwise().sum().squaredNorm());
}

// With p = 0 the allocator piles bits on one worker, past the 32-bit
// quantizer limit, so the 24-bit code is built directly.
TEST(Training, HighPrecisionMatchesUncodedGd) {
  Rng rng(11);
  const auto loss = LossModel::make_quadratic(8, 5, 1.0, rng);
  const auto prof = profiles_from_probabilities(std::vector<double>(4, 0.0));
  const double gamma = 0.5 / loss.smoothness();
  const auto cfg = gd_config(SchemeSpec::parse("proposed"), prof, 96, gamma, 200);
  const auto ideal = run_trial(loss, gd_config(SchemeSpec::parse("ideal_sgd"), prof, 0, gamma, 200), 0);

  SchemeInstance inst;
  inst.scheme = cfg.scheme;
  inst.bit_widths.assign(4, 24);
  inst.design = optimal_design(prof, inst.bit_widths, 5, 8, 1.0, rng);
  inst.phi.assign(4, variance_coeff(24, 5));
  TrainState state;
  state.beta = Eigen::VectorXd::Zero(5);
  for (std::uint64_t t = 0; t <= 200; ++t) {
    const double want = ideal[t].loss;
    EXPECT_NEAR(loss.loss(state.beta), want, 1e-4 * std::max(1.0, want)) << "t=" << t;
    if (t == 200) break;
    Rng step = Rng::keyed(cfg.seed, {t});
    train_step(state, inst, prof, loss, cfg, loss.partition_gradients(state.beta), nullptr, step);
  }
}

TEST(Training, IdealGdIsMonotone) {
  Rng rng(12);
  const auto loss = LossModel::make_logistic(6, 4, 5, rng);
  const auto prof = sample_profiles(3, 0.1, 2.0, 1.1, rng);
  const auto recs = run_trial(loss, gd_config(SchemeSpec::parse("ideal_sgd"), prof, 0, 1.0 / loss.smoothness(), 100), 0);
  ASSERT_EQ(recs.size(), 101u);
  EXPECT_EQ(recs[0].bits, 0u);
  for (std::size_t t = 1; t < recs.size(); ++t) {
    EXPECT_LE(recs[t].loss, recs[t - 1].loss + 1e-15);
    EXPECT_EQ(recs[t].bits, 3u * 32u * 4u);
    EXPECT_TRUE(std::isnan(recs[t].dist_sq));
  }
}

TEST(Training, NonFiniteIsReported) {
  Rng rng(13);
  const auto loss = LossModel::make_quadratic(4, 3, 1.0, rng);
  const auto prof = sample_profiles(3, 0.1, 2.0, 1.1, rng);
  auto cfg = gd_config(SchemeSpec::parse("ideal_sgd"), prof, 0, 1e3, 500);
  cfg.beta0 = Eigen::VectorXd::Ones(3);
  try {
    run_trial(loss, cfg, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNonFinite);
  }
}

TEST(Experiment, DeterministicAndAveraged) {
  Rng rng(14);
  const auto loss = LossModel::make_quadratic(10, 4, 1.0, rng);
  const auto prof = sample_profiles(5, 0.1, 2.0, 1.1, rng);
  auto cfg = gd_config(SchemeSpec::parse("proposed"), prof, 20, 0.05 / loss.smoothness(), 30);
  cfg.trials = 3;
  const auto a = run_experiment(loss, cfg);
  const auto b = run_experiment(loss, cfg);
  EXPECT_EQ(a.mean_loss, b.mean_loss);
  EXPECT_EQ(a.cum_bits, b.cum_bits);
  EXPECT_EQ(a.size(), 31u);
  EXPECT_EQ(a.trials, 3u);

  double mean0 = 0.0;
  for (std::size_t tr = 0; tr < 3; ++tr) mean0 += run_trial(loss, cfg, tr)[30].loss / 3.0;
  EXPECT_NEAR(a.mean_loss[30], mean0, 1e-12 * mean0);
  for (std::size_t t = 1; t < a.size(); ++t) EXPECT_GE(a.cum_bits[t], a.cum_bits[t - 1]);

  cfg.trials = 1;
  const auto one = run_experiment(loss, cfg);
  EXPECT_EQ(one.se_loss[30], 0.0);
  cfg.trials = 0;
  EXPECT_THROW(run_experiment(loss, cfg), Error);
}

// Sampling noise and system noise add: E|g_hat - g|^2 over mini-batches equals
// the mini-batch variance plus the coded-system error at the sampled gradients.
TEST(SimProperty, MiniBatchNoiseIsAdditive) {
  Rng rng(15);
  const auto loss = LossModel::make_quadratic(6, 3, 1.0, rng);
  const auto prof = sample_profiles(4, 0.5, 2.0, 1.1, rng);
  const auto inst = build_scheme(SchemeSpec::parse("proposed"), prof, 6, 3, 16, 1.0, rng);
  const auto beta = random_point(3, rng);
  const Eigen::MatrixXd exact = loss.partition_gradients(beta);
  const Eigen::VectorXd g = exact.rowwise().sum();

  constexpr int kDraws = 40000;
  std::vector<double> gap(kDraws);
  double scale = 0.0;
  Eigen::MatrixXd sampled(3, 6);
  for (int d = 0; d < kDraws; ++d) {
    for (std::size_t j = 0; j < 6; ++j) {
      loss.sampled_partition_gradient(j, beta, 1, rng, sampled.col(static_cast<Eigen::Index>(j)));
    }
    const Eigen::VectorXd s = sampled.rowwise().sum();
    Rng step = Rng::keyed(99, {static_cast<std::uint64_t>(d)});
    const auto agg = aggregate_step(inst, prof, sampled, nullptr, step);
    const double total = (agg.first - g).squaredNorm();
    const double sampling = (s - g).squaredNorm();
    const double system = (agg.first - s).squaredNorm();
    gap[d] = total - sampling - system;
    scale += total / kDraws;
  }
  double m = 0.0, q = 0.0;
  for (double x : gap) m += x / kDraws;
  for (double x : gap) q += (x - m) * (x - m);
  const double se = std::sqrt(q / (kDraws - 1.0) / kDraws);
  EXPECT_LE(std::abs(m), 4.0 * se);
  EXPECT_LT(se, 0.1 * scale);
}

}  // namespace
}  // namespace agc
