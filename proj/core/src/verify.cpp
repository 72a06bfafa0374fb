// Copyright 2026 The AGC Authors
// SPDX-License-Identifier: Apache-2.0

#include "agc/verify.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#include "agc/baselines.hpp"
#include "agc/bit_alloc.hpp"
#include "agc/code_design.hpp"
#include "agc/error.hpp"
#include "agc/quantizer.hpp"
#include "agc/sim.hpp"
#include "agc/straggler.hpp"

namespace agc {
namespace {

// Workload defaults shared by several checks.
constexpr std::size_t kWorkers = 10;
constexpr double kPsiMin = 0.1;
constexpr double kPsiMax = 2.0;
constexpr double kTau = 1.1;

using Clock = std::chrono::steady_clock;

template <class... Args>
std::string format(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double phi_of(const VerifyOptions& opt, int z, std::size_t dim) {
  return opt.phi_override ? opt.phi_override(z, dim) : variance_coeff(z, dim);
}

void note(const VerifyOptions& opt, const std::string& line) {
  if (opt.log) opt.log(line);
}

Eigen::MatrixXd random_grads(std::size_t dim, std::size_t n, Rng& rng) {
  Eigen::MatrixXd g(dim, n);
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index t = 0; t < g.rows(); ++t) g(t, j) = rng.normal();
  }
  return g;
}

// Matched design for given bits with the (possibly overridden) phi.
CodeDesign design_for(const Profiles& profiles, std::span<const int> z, std::size_t dim,
                      std::size_t n, const VerifyOptions& opt, Rng& rng) {
  std::vector<double> phi(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) phi[i] = phi_of(opt, z[i], dim);
  const auto c = cost_coeffs(probabilities(profiles), phi, 1.0);
  return realize_code(segment_construction(target_masses(c, n), n), profiles, c, rng);
}

template <class F>
CheckResult timed(int id, const char* name, F&& body) {
  CheckResult r;
  r.id = id;
  r.name = name;
  const auto t0 = Clock::now();
  body(r);
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return r;
}

}  // namespace

CheckResult check_dp_optimality(const VerifyOptions& opt) {
  return timed(1, "DP matches exhaustive search", [&](CheckResult& r) {
    double worst = 0.0;
    int cases = 0;
    for (std::size_t k = 1; k <= 4; ++k) {
      for (int z = 0; z <= 12; ++z) {
        for (std::uint64_t s = 0; s < 50; ++s) {
          for (std::size_t dim : {std::size_t{4}, std::size_t{36}}) {
            Rng rng = Rng::keyed(opt.seed, {1, k, static_cast<std::uint64_t>(z), s, dim});
            const auto p = probabilities(sample_profiles(k, kPsiMin, kPsiMax, kTau, rng));
            const double f_dp = dp_allocate(p, dim, z).objective;
            const double f_ex = exhaustive_oracle(p, dim, z).objective;
            worst = std::max(worst, std::abs(f_dp - f_ex) / std::max(std::abs(f_ex), 1e-300));
            ++cases;
          }
        }
      }
    }
    r.pass = worst < 1e-12;
    r.measured = format("%d instances, max rel diff %.3e (< 1e-12)", cases, worst);
  });
}

CheckResult check_proposed_near_optimal(const VerifyOptions& opt) {
  return timed(2, "low-complexity allocator near-optimal and faster than DP", [&](CheckResult& r) {
    constexpr std::size_t kDim = 1024;
    constexpr int kInstances = 100;
    constexpr int kRepeats = 20;
    bool ok = true;
    std::string msg;
    for (int z : {10, 50}) {
      std::vector<std::vector<double>> ps;
      for (int s = 0; s < kInstances; ++s) {
        Rng rng = Rng::keyed(opt.seed, {2, static_cast<std::uint64_t>(z), static_cast<std::uint64_t>(s)});
        ps.push_back(probabilities(sample_profiles(kWorkers, kPsiMin, kPsiMax, kTau, rng)));
      }
      int good = 0;
      for (const auto& p : ps) {
        const double ratio = proposed_allocate(p, kDim, z).objective / dp_allocate(p, kDim, z).objective;
        if (ratio >= 0.99) ++good;
      }
      ok = ok && good >= 95;
      msg += format("Z_res=%d: ratio>=0.99 on %d/%d; ", z, good, kInstances);
      if (z != 50) continue;
      // Best of several passes over all instances, alternating solvers.
      double best_dp = 1e300;
      double best_prop = 1e300;
      double sink = 0.0;
      for (int rep = 0; rep < 5; ++rep) {
        auto t0 = Clock::now();
        for (int k = 0; k < kRepeats; ++k) {
          for (const auto& p : ps) sink += dp_allocate(p, kDim, z).objective;
        }
        auto t1 = Clock::now();
        for (int k = 0; k < kRepeats; ++k) {
          for (const auto& p : ps) sink += proposed_allocate(p, kDim, z).objective;
        }
        auto t2 = Clock::now();
        best_dp = std::min(best_dp, std::chrono::duration<double>(t1 - t0).count());
        best_prop = std::min(best_prop, std::chrono::duration<double>(t2 - t1).count());
      }
      const double per = 1e6 / (kRepeats * kInstances);
      const bool faster = best_prop < best_dp;
      ok = ok && faster && sink > 0.0;
      msg += format("wall time per instance at Z_res=50: proposed %.1f us vs DP %.1f us (%s)",
                    best_prop * per, best_dp * per, faster ? "faster" : "NOT faster");
    }
    r.pass = ok;
    r.measured = msg;
  });
}

CheckResult check_design_structure(const VerifyOptions& opt) {
  return timed(3, "segment construction structure", [&](CheckResult& r) {
    double row_err = 0.0;
    double col_err = 0.0;
    double ident_err = 0.0;
    int nnz_viol = 0;
    int load_viol = 0;
    for (std::uint64_t s = 0; s < 200; ++s) {
      Rng rng = Rng::keyed(opt.seed, {3, s});
      const std::size_t k = 1 + rng.below(20);
      const std::size_t n = 1 + rng.below(200);
      const std::size_t dim = 1 + rng.below(1024);
      const auto profiles = sample_profiles(k, kPsiMin, kPsiMax, kTau, rng);
      std::vector<int> z(k);
      for (int& v : z) v = 2 + static_cast<int>(rng.below(7));
      std::vector<double> phi(k);
      for (std::size_t i = 0; i < k; ++i) phi[i] = phi_of(opt, z[i], dim);
      const auto c = cost_coeffs(probabilities(profiles), phi, 1.0);
      const auto y = target_masses(c, n);
      const auto d = realize_code(segment_construction(y, n), profiles, c, rng);
      for (std::size_t i = 0; i < k; ++i) row_err = std::max(row_err, std::abs(d.alpha.row_sum(i) - y[i]));
      for (double v : d.alpha.col_sums()) col_err = std::max(col_err, std::abs(v - 1.0));
      if (d.alpha.nnz() > n + k - 1) ++nnz_viol;
      if (d.load() > 1.0 + static_cast<double>(k - 1) / static_cast<double>(n) + 1e-12) ++load_viol;
      double lhs = 0.0;
      double inv = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        lhs += c[i] * y[i] * y[i];
        inv += 1.0 / c[i];
      }
      const double rhs = static_cast<double>(n * n) / inv;
      ident_err = std::max(ident_err, std::abs(lhs - rhs) / rhs);
    }
    r.pass = row_err < 1e-9 && col_err < 1e-9 && nnz_viol == 0 && load_viol == 0 && ident_err < 1e-9;
    r.measured = format(
        "200 designs: row err %.2e, col err %.2e, nnz violations %d, load violations %d, "
        "sum c Y^2 rel err %.2e",
        row_err, col_err, nnz_viol, load_viol, ident_err);
  });
}

CheckResult check_error_bound(const VerifyOptions& opt) {
  return timed(4, "residual error bound and error split", [&](CheckResult& r) {
    constexpr std::size_t kN = 20;
    constexpr std::size_t kDim = 64;
    constexpr std::size_t kDraws = 100000;
    int bound_fail = 0;
    int split_fail = 0;
    double worst_ratio = 0.0;
    double worst_split = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
      Rng rng = Rng::keyed(opt.seed, {4, s});
      const auto profiles = sample_profiles(kWorkers, kPsiMin, kPsiMax, kTau, rng);
      const int z_res = static_cast<int>(rng.below(2 * kWorkers + 1));
      const auto z = proposed_allocate(probabilities(profiles), kDim, z_res).bit_widths();
      const auto design = design_for(profiles, z, kDim, kN, opt, rng);
      const Eigen::MatrixXd grads = random_grads(kDim, kN, rng);
      double c_max = 0.0;
      for (Eigen::Index j = 0; j < grads.cols(); ++j) c_max = std::max(c_max, grads.col(j).squaredNorm());
      const double grad_bound = std::max(1.1 * c_max, 1e-12);
      const double bound = residual_error_bound(design.cost, kN, grad_bound);

      Rng full_rng = rng.child(1);
      Rng strag_rng = rng.child(2);
      Rng quant_rng = rng.child(3);
      const auto total = monte_carlo_residual(design, z, grads, kDraws, full_rng, NoiseSource::kFull);
      const auto strag = monte_carlo_residual(design, z, grads, kDraws, strag_rng, NoiseSource::kStragglerOnly);
      const auto quant = monte_carlo_residual(design, z, grads, kDraws, quant_rng, NoiseSource::kQuantizationOnly);
      if (!(total.mean_sq_error <= bound + 3.0 * total.std_err)) ++bound_fail;
      worst_ratio = std::max(worst_ratio, total.mean_sq_error / bound);
      const double sigma = std::sqrt(total.std_err * total.std_err + strag.std_err * strag.std_err +
                                     quant.std_err * quant.std_err);
      const double gap = std::abs(total.mean_sq_error - strag.mean_sq_error - quant.mean_sq_error);
      if (!(gap <= 4.0 * sigma)) ++split_fail;
      worst_split = std::max(worst_split, gap / sigma);
      note(opt, format("  design %llu: mse %.4g bound %.4g | split gap %.2f sigma",
                       static_cast<unsigned long long>(s), total.mean_sq_error, bound, gap / sigma));
    }
    r.pass = bound_fail == 0 && split_fail == 0;
    r.measured = format(
        "20 designs: bound exceeded (beyond 3 se) on %d, max mse/bound %.3f; split off by >4 sigma "
        "on %d, max %.2f sigma",
        bound_fail, worst_ratio, split_fail, worst_split);
  });
}

CheckResult check_quantizer(const VerifyOptions& opt) {
  return timed(5, "quantizer unbiased, variance bound, wire round trip", [&](CheckResult& r) {
    constexpr std::size_t kDim = 8;
    constexpr std::size_t kDraws = 100000;
    int bias_fail = 0;
    int var_fail = 0;
    int wire_fail = 0;
    double worst_z = 0.0;
    double worst_var = 0.0;
    for (int z = 2; z <= 8; ++z) {
      for (std::uint64_t v = 0; v < 20; ++v) {
        Rng rng = Rng::keyed(opt.seed, {5, static_cast<std::uint64_t>(z), v});
        std::vector<double> x(kDim);
        for (double& e : x) e = rng.normal();
        double norm_sq = 0.0;
        for (double e : x) norm_sq += e * e;
        std::vector<double> sum(kDim, 0.0);
        std::vector<double> sum_sq(kDim, 0.0);
        double err_sq = 0.0;
        for (std::size_t d = 0; d < kDraws; ++d) {
          const auto msg = quantize(x, z, rng);
          const auto q = dequantize(msg);
          for (std::size_t m = 0; m < kDim; ++m) {
            sum[m] += q[m];
            sum_sq[m] += q[m] * q[m];
            err_sq += (q[m] - x[m]) * (q[m] - x[m]);
          }
          if (d < 64) {
            const auto bytes = pack(msg);
            const auto back = unpack(bytes, z, kDim);
            if (pack(back) != bytes || back.signs != msg.signs || back.levels != msg.levels ||
                back.norm != static_cast<double>(static_cast<float>(msg.norm))) {
              ++wire_fail;
            }
          }
        }
        const auto nd = static_cast<double>(kDraws);
        const double norm = std::sqrt(norm_sq);
        for (std::size_t m = 0; m < kDim; ++m) {
          const double mean = sum[m] / nd;
          const double var = std::max(0.0, sum_sq[m] / nd - mean * mean);
          const double se = std::sqrt(var / (nd - 1.0));
          // Floating-point slack for coordinates the quantizer reproduces exactly.
          const double tol = std::max(4.0 * se, 1e-12 * norm);
          if (!(std::abs(mean - x[m]) <= tol)) ++bias_fail;
          if (se > 0.0) worst_z = std::max(worst_z, std::abs(mean - x[m]) / se);
        }
        const double ratio = (err_sq / nd) / (variance_coeff(z, kDim) * norm_sq);
        worst_var = std::max(worst_var, ratio);
        if (!(ratio <= 1.05)) ++var_fail;
      }
    }
    r.pass = bias_fail == 0 && var_fail == 0 && wire_fail == 0;
    r.measured = format(
        "z=2..8 x 20 vectors: biased coords %d (max |z-score| %.2f), variance/phi|x|^2 max %.3f "
        "(<= 1.05, %d over), wire mismatches %d",
        bias_fail, worst_z, worst_var, var_fail, wire_fail);
  });
}

namespace {

std::vector<double> scheme_cost(const TrainConfig& cfg, const LossModel& loss) {
  Rng rng(0);
  const auto inst = build_scheme(cfg.scheme, cfg.profiles, loss.partitions(), loss.dim(),
                                 cfg.z_tot, cfg.eta, rng);
  return inst.design->cost;
}

}  // namespace

CheckResult check_strongly_convex(const VerifyOptions& opt) {
  return timed(6, "strongly convex rate bound", [&](CheckResult& r) {
    Rng rng = Rng::keyed(opt.seed, {6});
    const auto loss = LossModel::make_quadratic(20, 32, 1.0, rng);
    TrainConfig cfg;
    cfg.scheme = SchemeSpec{SchemeKind::kProposed};
    cfg.profiles = sample_profiles(kWorkers, kPsiMin, kPsiMax, kTau, rng);
    cfg.z_tot = 4 * static_cast<int>(kWorkers);
    cfg.iterations = 10000;
    cfg.lr = LrSchedule{Schedule::kInvLambdaT, 0.0};
    cfg.optimizer.kind = OptimizerKind::kGd;
    cfg.seed = opt.seed + 6;
    cfg.trials = 50;
    const Eigen::VectorXd beta0 = Eigen::VectorXd::Zero(32);
    const auto warm = gd_trajectory(loss, beta0, 1.0 / loss.smoothness(), 100);
    const double grad_bound = calibrate_C(loss, warm);
    const auto cost = scheme_cost(cfg, loss);
    const auto series = run_experiment(loss, cfg);
    bool ok = true;
    std::string msg = format("C=%.4g; ", grad_bound);
    for (std::size_t t : {10u, 100u, 1000u, 10000u}) {
      const double b = strongly_convex_bound(cost, 20, grad_bound, loss.strong_convexity(), t);
      const double d = series.mean_dist_sq[t];
      ok = ok && d <= b;
      msg += format("T=%zu: %.3e <= %.3e; ", t, d, b);
    }
    r.pass = ok;
    r.measured = msg;
  });
}

CheckResult check_smooth(const VerifyOptions& opt) {
  return timed(7, "smooth-loss rate bounds and decay", [&](CheckResult& r) {
    Rng rng = Rng::keyed(opt.seed, {7});
    const auto loss = LossModel::make_logistic(20, 16, 5, rng);
    const Eigen::VectorXd beta0 = Eigen::VectorXd::Zero(16);
    const double l_star = reference_min_loss(loss, beta0, 100000);
    const double gap = loss.loss(beta0) - l_star;
    const auto warm = gd_trajectory(loss, beta0, 1.0 / loss.smoothness(), 100);
    const double grad_bound = calibrate_C(loss, warm);

    TrainConfig cfg;
    cfg.scheme = SchemeSpec{SchemeKind::kProposed};
    cfg.profiles = sample_profiles(kWorkers, kPsiMin, kPsiMax, kTau, rng);
    cfg.z_tot = 4 * static_cast<int>(kWorkers);
    cfg.optimizer.kind = OptimizerKind::kGd;
    cfg.seed = opt.seed + 7;
    cfg.trials = 50;
    const auto cost = scheme_cost(cfg, loss);
    const double mu = loss.smoothness();

    auto run = [&](Schedule s, std::size_t iters) {
      TrainConfig c = cfg;
      c.lr = LrSchedule{s, 0.0};
      c.iterations = iters;
      return run_experiment(loss, c);
    };
    bool ok = true;
    std::string msg;
    // Constant step: the step depends on the horizon, so one run per T.
    const auto c2 = run(Schedule::kConstSqrt, 100);
    const auto c3 = run(Schedule::kConstSqrt, 1000);
    const auto c4 = run(Schedule::kConstSqrt, 10000);
    const double avg_c3 = c3.running_grad_sq(1000);
    const double bound_c = smooth_const_bound(cost, 20, grad_bound, mu, gap, 1000);
    const double drop_c = c2.running_grad_sq(100) / c4.running_grad_sq(10000);
    ok = ok && avg_c3 <= bound_c && drop_c >= 2.0;
    msg += format("const: avg %.3e <= %.3e, T=1e2->1e4 drop %.2fx; ", avg_c3, bound_c, drop_c);
    const auto d4 = run(Schedule::kDecaySqrt, 10000);
    const double avg_d3 = d4.running_grad_sq(1000);
    const double bound_d = smooth_decay_bound(cost, 20, grad_bound, mu, gap, 1000);
    const double drop_d = d4.running_grad_sq(100) / d4.running_grad_sq(10000);
    ok = ok && avg_d3 <= bound_d && drop_d >= 2.0;
    msg += format("decay: avg %.3e <= %.3e, T=1e2->1e4 drop %.2fx", avg_d3, bound_d, drop_d);
    r.pass = ok;
    r.measured = msg;
  });
}

CheckResult check_two_track(const VerifyOptions& opt) {
  return timed(8, "two-track decoder reduces second-moment variance", [&](CheckResult& r) {
    constexpr std::size_t kN = 20;
    constexpr std::size_t kDim = 16;
    constexpr std::size_t kDraws = 10000;
    int closed_fail = 0;
    int mc_fail = 0;
    double worst_closed = 0.0;
    double worst_mc = 0.0;
    for (std::uint64_t s = 0; s < 50; ++s) {
      Rng rng = Rng::keyed(opt.seed, {8, s});
      const auto profiles = sample_profiles(kWorkers, kPsiMin, kPsiMax, kTau, rng);
      const int z_res = static_cast<int>(rng.below(3 * kWorkers + 1));
      const auto z = proposed_allocate(probabilities(profiles), kDim, z_res).bit_widths();
      const auto design = design_for(profiles, z, kDim, kN, opt, rng);
      std::vector<double> phi(kWorkers);
      for (std::size_t i = 0; i < kWorkers; ++i) phi[i] = phi_of(opt, z[i], kDim);
      const Eigen::MatrixXd grads = random_grads(kDim, kN, rng);
      const auto at_w = second_moment_objective(design, phi, design.decoder);
      for (double lambda : {0.1, 1.0, 10.0}) {
        const auto v = two_track_decoder(design, phi, lambda);
        const auto at_v = second_moment_objective(design, phi, v);
        const double slack = 1e-12 * at_w.variance;
        if (!(at_v.variance <= at_w.variance + slack) ||
            !(at_v.weighted(lambda) <= at_w.variance + slack)) {
          ++closed_fail;
        }
        worst_closed = std::max(worst_closed, at_v.weighted(lambda) / at_w.variance);

        // Paired draws: both decoders see the same stragglers and messages.
        SchemeInstance inst;
        inst.design = design;
        inst.bit_widths = z;
        Eigen::VectorXd sum_w = Eigen::VectorXd::Zero(kDim), sq_w = sum_w;
        Eigen::VectorXd sum_v = sum_w, sq_v = sum_w;
        for (std::size_t d = 0; d < kDraws; ++d) {
          Rng draw = rng.child(d);
          const auto agg = aggregate_step(inst, profiles, grads, &v, draw);
          sum_w += agg.first;
          sq_w += agg.first.cwiseProduct(agg.first);
          sum_v += agg.second;
          sq_v += agg.second.cwiseProduct(agg.second);
        }
        const auto nd = static_cast<double>(kDraws);
        const double var_w = (sq_w / nd - (sum_w / nd).cwiseProduct(sum_w / nd)).sum();
        const double var_v = (sq_v / nd - (sum_v / nd).cwiseProduct(sum_v / nd)).sum();
        if (!(var_v <= var_w)) ++mc_fail;
        worst_mc = std::max(worst_mc, var_v / var_w);
      }
    }
    r.pass = closed_fail == 0 && mc_fail == 0;
    r.measured = format(
        "150 (design, Lambda) pairs: closed-form violations %d (max (L*Bias+Var)(v*)/Var(w) %.3f), "
        "Monte Carlo violations %d (max var ratio %.3f)",
        closed_fail, worst_closed, mc_fail, worst_mc);
  });
}

namespace {

struct OrderingSetup {
  LossModel loss;
  Profiles profiles;
};

OrderingSetup ordering_setup(const VerifyOptions& opt, std::uint64_t tag, std::uint64_t seed) {
  Rng rng = Rng::keyed(opt.seed, {tag, seed});
  auto loss = LossModel::make_quadratic(20, 32, 1.0, rng);
  auto profiles = sample_profiles(kWorkers, kPsiMin, kPsiMax, kTau, rng);
  return {std::move(loss), std::move(profiles)};
}

TrainConfig ordering_config(const OrderingSetup& s, SchemeSpec scheme, int z_tot,
                            std::uint64_t seed) {
  TrainConfig cfg;
  cfg.scheme = scheme;
  cfg.profiles = s.profiles;
  cfg.z_tot = z_tot;
  cfg.iterations = 1000;
  cfg.lr = LrSchedule{Schedule::kFixed, 0.05 / s.loss.smoothness()};
  cfg.optimizer.kind = OptimizerKind::kGd;
  cfg.seed = seed;
  cfg.trials = 10;
  return cfg;
}

}  // namespace

CheckResult check_ordering(const VerifyOptions& opt) {
  return timed(9, "convergence ordering across schemes", [&](CheckResult& r) {
    const int k = static_cast<int>(kWorkers);
    bool ok = true;
    std::string msg;
    for (int z_res : {k, 5 * k}) {
      int good = 0;
      for (std::uint64_t s = 0; s < 20; ++s) {
        const auto setup = ordering_setup(opt, 9, s);
        const std::uint64_t run_seed = opt.seed + 1000 * s + 9;
        auto final_loss = [&](SchemeSpec spec) {
          return run_experiment(setup.loss, ordering_config(setup, spec, 2 * k + z_res, run_seed))
              .mean_loss.back();
        };
        const double ideal = final_loss({SchemeKind::kIdealSgd});
        const double prop = final_loss({SchemeKind::kProposed});
        const double osgc = final_loss({SchemeKind::kOsgcEqualBits});
        const double bgc = final_loss({SchemeKind::kBgc, 2.0});
        const bool in_order = ideal <= prop && prop <= osgc && prop <= bgc;
        if (in_order) ++good;
        note(opt, format("  Z_res=%d seed %llu: ideal %.6g proposed %.6g osgc %.6g bgc %.6g %s",
                         z_res, static_cast<unsigned long long>(s), ideal, prop, osgc, bgc,
                         in_order ? "ok" : "out of order"));
      }
      ok = ok && good >= 16;
      msg += format("Z_res=%d: ordered on %d/20 seeds; ", z_res, good);
    }
    r.pass = ok;
    r.measured = msg + "(need >= 16)";
  });
}

CheckResult check_bits(const VerifyOptions& opt) {
  return timed(10, "bit savings and loss-vs-bits dominance", [&](CheckResult& r) {
    const int k = static_cast<int>(kWorkers);
    int dominated = 0;
    double worst_ratio = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
      const auto setup = ordering_setup(opt, 10, s);
      const std::uint64_t run_seed = opt.seed + 1000 * s + 10;
      const auto prop = run_experiment(
          setup.loss, ordering_config(setup, {SchemeKind::kProposed}, 4 * k, run_seed));
      const auto bgc = run_experiment(
          setup.loss, ordering_config(setup, {SchemeKind::kBgc, 2.0}, 4 * k, run_seed));
      const std::size_t t_end = prop.size() - 1;
      const double uncoded = 32.0 * k * static_cast<double>(setup.loss.dim()) * static_cast<double>(t_end);
      worst_ratio = std::max(worst_ratio, prop.cum_bits.back() / uncoded);

      // Loss reached within a bit budget: the last iterate whose cumulative
      // bits fit.
      auto loss_at = [](const MetricsSeries& m, double budget) {
        std::size_t t = 0;
        while (t + 1 < m.size() && m.cum_bits[t + 1] <= budget) ++t;
        return m.mean_loss[t];
      };
      const double top = std::min(prop.cum_bits.back(), bgc.cum_bits.back());
      bool dom = true;
      for (int g = 1; g <= 10; ++g) {
        const double budget = top * g / 10.0;
        if (loss_at(prop, budget) > loss_at(bgc, budget)) dom = false;
      }
      if (dom) ++dominated;
    }
    r.pass = worst_ratio < 0.125 && dominated >= 16;
    r.measured = format(
        "cumulative bits / uncoded 32-bit baseline: max %.4f (< 0.125); loss-vs-bits dominance "
        "on %d/20 seeds (need >= 16)",
        worst_ratio, dominated);
  });
}

std::vector<int> check_ids() { return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}; }

CheckResult run_check(int id, const VerifyOptions& opt) {
  switch (id) {
    case 1: return check_dp_optimality(opt);
    case 2: return check_proposed_near_optimal(opt);
    case 3: return check_design_structure(opt);
    case 4: return check_error_bound(opt);
    case 5: return check_quantizer(opt);
    case 6: return check_strongly_convex(opt);
    case 7: return check_smooth(opt);
    case 8: return check_two_track(opt);
    case 9: return check_ordering(opt);
    case 10: return check_bits(opt);
    default: throw Error(ErrorKind::kInvalidInput, "no check with id " + std::to_string(id));
  }
}

}  // namespace agc
