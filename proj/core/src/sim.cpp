// Copyright 2026 The AGC Authors
// SPDX-License-Identifier: Apache-2.0

#include "agc/sim.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <thread>

#include "agc/error.hpp"
#include "agc/quantizer.hpp"

namespace agc {
namespace {

// Substream tags under Rng::keyed(seed, {trial, tag, ...}).
constexpr std::uint64_t kDesignTag = 1;
constexpr std::uint64_t kIterTag = 2;
// Children of an iteration stream.
constexpr std::uint64_t kStraggleTag = 0;
constexpr std::uint64_t kBatchTag = 1;
constexpr std::uint64_t kWorkerTagBase = 1000;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }
double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double inverse_cost_sum(std::span<const double> cost) {
  double s = 0.0;
  for (double c : cost) {
    if (!(c > 0.0)) throw Error(ErrorKind::kInvalidCost, "cost coefficients must be > 0");
    s += 1.0 / c;
  }
  return s;
}

Eigen::MatrixXd gaussian(std::size_t rows, std::size_t cols, double scale, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = scale * rng.normal();
  }
  return m;
}

}  // namespace

// ---------------------------------------------------------------- LossModel

LossModel LossModel::quadratic(std::vector<Eigen::MatrixXd> a, std::vector<Eigen::VectorXd> y) {
  if (a.empty() || a.size() != y.size()) {
    throw Error(ErrorKind::kInvalidInput, "need one (A_j, y_j) pair per partition");
  }
  LossModel m;
  m.kind_ = LossKind::kQuadratic;
  m.dim_ = static_cast<std::size_t>(a.front().cols());
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (static_cast<std::size_t>(a[j].cols()) != m.dim_ || a[j].rows() != y[j].size()) {
      throw Error(ErrorKind::kInvalidInput, "inconsistent block shapes");
    }
    Block b;
    b.a = std::move(a[j]);
    b.y = std::move(y[j]);
    m.blocks_.push_back(std::move(b));
  }
  m.finish_quadratic();
  return m;
}

void LossModel::finish_quadratic() {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim_, dim_);
  Eigen::VectorXd lin = Eigen::VectorXd::Zero(dim_);
  for (auto& b : blocks_) {
    b.hess = b.a.transpose() * b.a;
    b.lin = b.a.transpose() * b.y;
    b.offset = 0.5 * b.y.squaredNorm();
    h += b.hess;
    lin += b.lin;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h, Eigen::EigenvaluesOnly);
  lambda_ = eig.eigenvalues().minCoeff();
  mu_ = eig.eigenvalues().maxCoeff();
  if (lambda_ > 0.0) optimum_ = h.ldlt().solve(lin);
}

LossModel LossModel::make_quadratic(std::size_t n, std::size_t dim, double lambda_target,
                                    Rng& rng) {
  if (n == 0 || dim == 0) throw Error(ErrorKind::kInvalidInput, "n and l must be >= 1");
  if (!(lambda_target > 0.0)) throw Error(ErrorKind::kInvalidInput, "lambda_target must be > 0");
  const Eigen::VectorXd beta_true = gaussian(dim, 1, 1.0, rng);
  std::vector<Eigen::MatrixXd> g(n);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (auto& gj : g) {
    gj = gaussian(dim, dim, 1.0, rng);
    h += gj.transpose() * gj;
  }
  // Scale the random part to a largest eigenvalue of 0.9 lambda_target, then
  // shift the smallest up to lambda_target: the condition number is < 1.9.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h, Eigen::EigenvaluesOnly);
  const double scale = std::sqrt(0.9 * lambda_target / eig.eigenvalues().maxCoeff());
  const double shift = lambda_target - scale * scale * eig.eigenvalues().minCoeff();
  const double ridge_row = std::sqrt(shift / static_cast<double>(n));

  std::vector<Eigen::MatrixXd> a(n);
  std::vector<Eigen::VectorXd> y(n);
  for (std::size_t j = 0; j < n; ++j) {
    a[j].resize(2 * dim, dim);
    a[j].topRows(dim) = scale * g[j];
    a[j].bottomRows(dim) = ridge_row * Eigen::MatrixXd::Identity(dim, dim);
    y[j] = Eigen::VectorXd::Zero(2 * dim);
    y[j].head(dim) = a[j].topRows(dim) * beta_true + gaussian(dim, 1, 0.5 * scale, rng);
  }
  return quadratic(std::move(a), std::move(y));
}

LossModel LossModel::logistic(std::vector<Eigen::MatrixXd> x, std::vector<Eigen::VectorXd> labels,
                              double l2) {
  if (x.empty() || x.size() != labels.size()) {
    throw Error(ErrorKind::kInvalidInput, "need one (X_j, y_j) pair per partition");
  }
  if (!(l2 >= 0.0)) throw Error(ErrorKind::kInvalidInput, "L2 weight must be >= 0");
  LossModel m;
  m.kind_ = LossKind::kLogistic;
  m.dim_ = static_cast<std::size_t>(x.front().cols());
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m.dim_, m.dim_);
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (static_cast<std::size_t>(x[j].cols()) != m.dim_ || x[j].rows() != labels[j].size()) {
      throw Error(ErrorKind::kInvalidInput, "inconsistent block shapes");
    }
    for (Eigen::Index r = 0; r < labels[j].size(); ++r) {
      if (labels[j][r] != 1.0 && labels[j][r] != -1.0) {
        throw Error(ErrorKind::kInvalidInput, "labels must be +1 or -1");
      }
    }
    gram += x[j].transpose() * x[j];
    Block b;
    b.a = std::move(x[j]);
    b.y = std::move(labels[j]);
    m.blocks_.push_back(std::move(b));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  m.ridge_ = l2 / static_cast<double>(m.blocks_.size());
  m.lambda_ = l2;
  m.mu_ = 0.25 * eig.eigenvalues().maxCoeff() + l2;
  return m;
}

LossModel LossModel::make_logistic(std::size_t n, std::size_t dim,
                                   std::size_t samples_per_partition, Rng& rng, double l2,
                                   double separation) {
  if (n == 0 || dim == 0 || samples_per_partition == 0) {
    throw Error(ErrorKind::kInvalidInput, "n, l and samples must be >= 1");
  }
  Eigen::VectorXd u = gaussian(dim, 1, 1.0, rng);
  u /= u.norm();
  std::vector<Eigen::MatrixXd> x(n);
  std::vector<Eigen::VectorXd> y(n);
  for (std::size_t j = 0; j < n; ++j) {
    x[j].resize(samples_per_partition, dim);
    y[j].resize(samples_per_partition);
    for (std::size_t s = 0; s < samples_per_partition; ++s) {
      const double label = rng.bernoulli(0.5) ? 1.0 : -1.0;
      y[j][s] = label;
      for (std::size_t t = 0; t < dim; ++t) x[j](s, t) = label * separation * u[t] + rng.normal();
    }
  }
  return logistic(std::move(x), std::move(y), l2);
}

double LossModel::partition_loss(std::size_t j, const Eigen::VectorXd& beta) const {
  const Block& b = blocks_.at(j);
  if (kind_ == LossKind::kQuadratic) {
    return 0.5 * beta.dot(b.hess * beta) - b.lin.dot(beta) + b.offset;
  }
  const Eigen::VectorXd margin = (b.a * beta).cwiseProduct(b.y);
  double s = 0.0;
  for (Eigen::Index r = 0; r < margin.size(); ++r) s += softplus(-margin[r]);
  return s + 0.5 * ridge_ * beta.squaredNorm();
}

double LossModel::loss(const Eigen::VectorXd& beta) const {
  double s = 0.0;
  for (std::size_t j = 0; j < blocks_.size(); ++j) s += partition_loss(j, beta);
  return s;
}

void LossModel::partition_gradient(std::size_t j, const Eigen::VectorXd& beta,
                                   Eigen::Ref<Eigen::VectorXd> out) const {
  const Block& b = blocks_.at(j);
  if (kind_ == LossKind::kQuadratic) {
    out.noalias() = b.hess * beta - b.lin;
    return;
  }
  Eigen::VectorXd weight = (b.a * beta).cwiseProduct(b.y);
  for (Eigen::Index r = 0; r < weight.size(); ++r) weight[r] = -b.y[r] * sigmoid(-weight[r]);
  out.noalias() = b.a.transpose() * weight;
  out += ridge_ * beta;
}

Eigen::MatrixXd LossModel::partition_gradients(const Eigen::VectorXd& beta) const {
  Eigen::MatrixXd g(dim_, blocks_.size());
  for (std::size_t j = 0; j < blocks_.size(); ++j) partition_gradient(j, beta, g.col(j));
  return g;
}

Eigen::VectorXd LossModel::gradient(const Eigen::VectorXd& beta) const {
  return partition_gradients(beta).rowwise().sum();
}

std::size_t LossModel::partition_rows(std::size_t j) const {
  return static_cast<std::size_t>(blocks_.at(j).a.rows());
}

void LossModel::sampled_partition_gradient(std::size_t j, const Eigen::VectorXd& beta,
                                           std::size_t batch, Rng& rng,
                                           Eigen::Ref<Eigen::VectorXd> out) const {
  if (batch == 0) throw Error(ErrorKind::kInvalidInput, "batch must be >= 1");
  const Block& b = blocks_.at(j);
  const auto rows = static_cast<std::uint64_t>(b.a.rows());
  const double scale = static_cast<double>(rows) / static_cast<double>(batch);
  out.setZero();
  for (std::size_t s = 0; s < batch; ++s) {
    const auto r = static_cast<Eigen::Index>(rng.below(rows));
    const double z = b.a.row(r).dot(beta);
    const double coeff = kind_ == LossKind::kQuadratic ? z - b.y[r] : -b.y[r] * sigmoid(-b.y[r] * z);
    out += (scale * coeff) * b.a.row(r).transpose();
  }
  if (kind_ == LossKind::kLogistic) out += ridge_ * beta;
}

double calibrate_C(const LossModel& loss, std::span<const Eigen::VectorXd> samples) {
  if (samples.empty()) throw Error(ErrorKind::kInvalidInput, "no calibration points");
  double worst = 0.0;
  Eigen::VectorXd g(loss.dim());
  for (const auto& beta : samples) {
    for (std::size_t j = 0; j < loss.partitions(); ++j) {
      loss.partition_gradient(j, beta, g);
      worst = std::max(worst, g.squaredNorm());
    }
  }
  return std::max(1.1 * worst, 1e-12);
}

double LrSchedule::rate(std::size_t t, std::size_t iterations, double lambda) const {
  const auto tt = static_cast<double>(t);
  switch (kind) {
    case Schedule::kInvLambdaT:
      if (!(lambda > 0.0)) throw Error(ErrorKind::kConfig, "1/(lambda t) needs lambda > 0");
      return 1.0 / (lambda * (tt + 1.0));
    case Schedule::kConstSqrt:
      return 1.0 / std::sqrt(static_cast<double>(iterations) + 1.0);
    case Schedule::kDecaySqrt:
      return 1.0 / std::sqrt(tt + 1.0);
    case Schedule::kFixed:
      return gamma;
  }
  return gamma;
}

// ------------------------------------------------------------------ schemes

SchemeInstance build_scheme(const SchemeSpec& scheme, const Profiles& profiles, std::size_t n,
                            std::size_t dim, int z_tot, double eta, Rng& rng) {
  scheme.validate(profiles.size());
  SchemeInstance inst;
  inst.scheme = scheme;
  switch (scheme.kind) {
    case SchemeKind::kIdealSgd:
      break;
    case SchemeKind::kIsSgd:
      inst.design = issgd_design(profiles, n);
      break;
    case SchemeKind::kBgc:
      inst.design = bgc_design(profiles, n, scheme.d, rng);
      break;
    case SchemeKind::kSgc:
      inst.design = sgc_design(profiles, n, static_cast<int>(scheme.d));
      break;
    case SchemeKind::kOsgcEqualBits: {
      auto q = osgc_equalbits_design(profiles, n, z_tot, rng);
      inst.design = std::move(q.design);
      inst.bit_widths = std::move(q.bit_widths);
      break;
    }
    case SchemeKind::kProposed: {
      auto q = proposed_design(profiles, n, z_tot, dim, eta, rng);
      inst.design = std::move(q.design);
      inst.bit_widths = std::move(q.bit_widths);
      break;
    }
  }
  inst.phi.assign(profiles.size(), 0.0);
  for (std::size_t i = 0; i < inst.bit_widths.size(); ++i) {
    inst.phi[i] = variance_coeff(inst.bit_widths[i], dim);
  }
  return inst;
}

Aggregate aggregate_step(const SchemeInstance& inst, const Profiles& profiles,
                         const Eigen::MatrixXd& grads, const std::vector<double>* second_decoder,
                         Rng& rng) {
  const auto dim = static_cast<std::size_t>(grads.rows());
  Aggregate out;
  out.first = Eigen::VectorXd::Zero(grads.rows());
  if (!inst.design) {
    out.first = grads.rowwise().sum();
    if (second_decoder != nullptr) out.second = out.first;
    out.bits = static_cast<std::uint64_t>(profiles.size()) * 32u * dim;
    return out;
  }
  const CodeDesign& d = *inst.design;
  if (second_decoder != nullptr) out.second = Eigen::VectorXd::Zero(grads.rows());
  Rng straggle = rng.child(kStraggleTag);
  const auto alive = sample_indicators(profiles, straggle);
  const bool quantized = !inst.bit_widths.empty();
  Eigen::VectorXd f(grads.rows());
  for (std::size_t i = 0; i < d.k; ++i) {
    if (!alive[i]) {
      ++out.stragglers;
      continue;
    }
    const auto row = d.encoding.row(i);
    if (row.empty()) continue;
    f.setZero();
    for (const auto& e : row) f += e.value * grads.col(static_cast<Eigen::Index>(e.col));
    const double w = d.decoder[i];
    if (quantized) {
      Rng qrng = rng.child(kWorkerTagBase + i);
      const auto msg = quantize(std::span<const double>(f.data(), dim), inst.bit_widths[i], qrng);
      accumulate_dequantized(msg, w, std::span<double>(out.first.data(), dim));
      if (second_decoder != nullptr) {
        accumulate_dequantized(msg, (*second_decoder)[i],
                               std::span<double>(out.second.data(), dim));
      }
      out.bits += payload_bits(inst.bit_widths[i], dim);
    } else {
      out.first += w * f;
      if (second_decoder != nullptr) out.second += (*second_decoder)[i] * f;
      out.bits += 32u * dim;
    }
  }
  return out;
}

void adam_step_two_track(Eigen::VectorXd& beta, AdamState& state, const Eigen::VectorXd& first,
                         const Eigen::VectorXd& second, double gamma,
                         const OptimizerConfig& hyper) {
  if (state.m.size() != beta.size()) {
    state.m = Eigen::VectorXd::Zero(beta.size());
    state.v = Eigen::VectorXd::Zero(beta.size());
    state.step = 0;
  }
  ++state.step;
  state.m = hyper.beta1 * state.m + (1.0 - hyper.beta1) * first;
  state.v = hyper.beta2 * state.v + (1.0 - hyper.beta2) * second.cwiseProduct(second);
  const auto t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(hyper.beta1, t);
  const double c2 = 1.0 - std::pow(hyper.beta2, t);
  beta.array() -= gamma * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + hyper.eps);
}

StepRecord train_step(TrainState& state, const SchemeInstance& inst, const Profiles& profiles,
                      const LossModel& loss, const TrainConfig& config,
                      const Eigen::MatrixXd& grads, const std::vector<double>* second_decoder,
                      Rng& rng) {
  const bool adam = config.optimizer.kind == OptimizerKind::kAdam;
  const auto agg = aggregate_step(inst, profiles, grads, adam ? second_decoder : nullptr, rng);
  const double gamma = config.lr.rate(state.t, config.iterations, loss.strong_convexity());
  if (adam) {
    const Eigen::VectorXd& second = second_decoder != nullptr ? agg.second : agg.first;
    adam_step_two_track(state.beta, state.adam, agg.first, second, gamma, config.optimizer);
  } else {
    state.beta -= gamma * agg.first;
  }
  if (!state.beta.allFinite()) {
    throw Error(ErrorKind::kNonFinite, "parameters became non-finite at update " +
                                           std::to_string(state.t) + " (scheme " +
                                           inst.scheme.name() + ")");
  }
  ++state.t;
  StepRecord rec;
  rec.bits = agg.bits;
  rec.stragglers = agg.stragglers;
  return rec;
}

std::vector<StepRecord> run_trial(const LossModel& loss, const TrainConfig& config,
                                  std::size_t trial) {
  const std::size_t n = loss.partitions();
  const std::size_t dim = loss.dim();
  Rng design_rng = Rng::keyed(config.seed, {trial, kDesignTag});
  const auto inst = build_scheme(config.scheme, config.profiles, n, dim, config.z_tot,
                                 config.eta, design_rng);
  std::vector<double> v_star;
  const bool adam = config.optimizer.kind == OptimizerKind::kAdam;
  if (adam && inst.design) v_star = two_track_decoder(*inst.design, inst.phi, config.optimizer.adam_lambda);

  TrainState state;
  state.beta = config.beta0.size() == 0 ? Eigen::VectorXd::Zero(dim) : config.beta0;
  if (static_cast<std::size_t>(state.beta.size()) != dim) {
    throw Error(ErrorKind::kInvalidInput, "beta0 has the wrong dimension");
  }
  const auto& opt = loss.optimum();
  std::vector<StepRecord> out(config.iterations + 1);
  Eigen::MatrixXd sampled;
  for (std::size_t t = 0; t <= config.iterations; ++t) {
    const Eigen::MatrixXd grads = loss.partition_gradients(state.beta);
    StepRecord& rec = out[t];
    rec.loss = loss.loss(state.beta);
    rec.grad_sq = grads.rowwise().sum().squaredNorm();
    rec.dist_sq = opt ? (state.beta - *opt).squaredNorm() : kNaN;
    if (t == config.iterations) break;

    Rng iter_rng = Rng::keyed(config.seed, {trial, kIterTag, t});
    const Eigen::MatrixXd* used = &grads;
    if (config.optimizer.kind == OptimizerKind::kSgd) {
      sampled.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(n));
      Rng batch_rng = iter_rng.child(kBatchTag);
      for (std::size_t j = 0; j < n; ++j) {
        Rng part = batch_rng.child(j);
        loss.sampled_partition_gradient(j, state.beta, config.optimizer.batch, part,
                                        sampled.col(static_cast<Eigen::Index>(j)));
      }
      used = &sampled;
    }
    const auto step = train_step(state, inst, config.profiles, loss, config, *used,
                                 v_star.empty() ? nullptr : &v_star, iter_rng);
    out[t + 1].bits = step.bits;
    out[t + 1].stragglers = step.stragglers;
  }
  return out;
}

double MetricsSeries::running_grad_sq(std::size_t t) const {
  double s = 0.0;
  for (std::size_t i = 0; i <= t; ++i) s += mean_grad_sq.at(i);
  return s / static_cast<double>(t + 1);
}

MetricsSeries run_experiment(const LossModel& loss, const TrainConfig& config) {
  if (config.trials == 0) throw Error(ErrorKind::kConfig, "trials must be >= 1");
  std::vector<std::vector<StepRecord>> runs(config.trials);
  std::vector<std::exception_ptr> errors(config.trials);
  const std::size_t workers =
      std::min<std::size_t>(config.trials, std::max(1u, std::thread::hardware_concurrency()));
  auto work = [&](std::size_t first) {
    for (std::size_t tr = first; tr < config.trials; tr += workers) {
      try {
        runs[tr] = run_trial(loss, config, tr);
      } catch (...) {
        errors[tr] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  const std::size_t len = config.iterations + 1;
  const auto trials = static_cast<double>(config.trials);
  MetricsSeries m;
  m.trials = config.trials;
  m.mean_loss.assign(len, 0.0);
  m.se_loss.assign(len, 0.0);
  m.mean_grad_sq.assign(len, 0.0);
  m.mean_dist_sq.assign(len, 0.0);
  m.mean_bits.assign(len, 0.0);
  m.cum_bits.assign(len, 0.0);
  m.mean_stragglers.assign(len, 0.0);
  for (std::size_t t = 0; t < len; ++t) {
    double sq = 0.0;
    for (const auto& run : runs) {
      const auto& r = run[t];
      m.mean_loss[t] += r.loss;
      sq += r.loss * r.loss;
      m.mean_grad_sq[t] += r.grad_sq;
      m.mean_dist_sq[t] += r.dist_sq;
      m.mean_bits[t] += static_cast<double>(r.bits);
      m.mean_stragglers[t] += static_cast<double>(r.stragglers);
    }
    m.mean_loss[t] /= trials;
    m.mean_grad_sq[t] /= trials;
    m.mean_dist_sq[t] /= trials;
    m.mean_bits[t] /= trials;
    m.mean_stragglers[t] /= trials;
    if (config.trials > 1) {
      const double var = std::max(0.0, (sq - trials * m.mean_loss[t] * m.mean_loss[t]) / (trials - 1.0));
      m.se_loss[t] = std::sqrt(var / trials);
    }
    m.cum_bits[t] = (t == 0 ? 0.0 : m.cum_bits[t - 1]) + m.mean_bits[t];
  }
  return m;
}

// --------------------------------------------------------------- estimators

ResidualEstimate monte_carlo_residual(const CodeDesign& design, std::span<const int> bit_widths,
                                      const Eigen::MatrixXd& grads, std::size_t trials, Rng& rng,
                                      NoiseSource source) {
  if (trials < 2) throw Error(ErrorKind::kInvalidInput, "need at least 2 draws");
  if (static_cast<std::size_t>(grads.cols()) != design.n) {
    throw Error(ErrorKind::kInvalidInput, "one gradient column per partition");
  }
  const bool quantized = !bit_widths.empty();
  if (quantized && bit_widths.size() != design.k) {
    throw Error(ErrorKind::kInvalidInput, "one bit width per worker");
  }
  const auto dim = static_cast<std::size_t>(grads.rows());
  const Eigen::VectorXd g = grads.rowwise().sum();
  std::vector<Eigen::VectorXd> f(design.k, Eigen::VectorXd::Zero(grads.rows()));
  std::vector<bool> active(design.k, false);
  for (std::size_t i = 0; i < design.k; ++i) {
    for (const auto& e : design.encoding.row(i)) {
      f[i] += e.value * grads.col(static_cast<Eigen::Index>(e.col));
      active[i] = true;
    }
  }
  const auto profiles = profiles_from_probabilities(design.p);

  Eigen::VectorXd err(grads.rows());
  Eigen::VectorXd q(grads.rows());
  Eigen::VectorXd bias_sum = Eigen::VectorXd::Zero(grads.rows());
  Eigen::VectorXd bias_sq = Eigen::VectorXd::Zero(grads.rows());
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t draw = 0; draw < trials; ++draw) {
    const auto alive = sample_indicators(profiles, rng);
    // err = g_hat - g (or the quantization part alone).
    if (source == NoiseSource::kQuantizationOnly) {
      err.setZero();
    } else {
      err = -g;
    }
    for (std::size_t i = 0; i < design.k; ++i) {
      if (!alive[i] || !active[i]) continue;
      const double w = design.decoder[i];
      const bool quantize_now = quantized && source != NoiseSource::kStragglerOnly;
      if (!quantize_now) {
        if (source != NoiseSource::kQuantizationOnly) err += w * f[i];
        continue;
      }
      q.setZero();
      const auto msg = quantize(std::span<const double>(f[i].data(), dim), bit_widths[i], rng);
      accumulate_dequantized(msg, 1.0, std::span<double>(q.data(), dim));
      if (source == NoiseSource::kQuantizationOnly) {
        err += w * (q - f[i]);
      } else {
        err += w * q;
      }
    }
    const double e2 = err.squaredNorm();
    sum += e2;
    sum_sq += e2 * e2;
    bias_sum += err;
    bias_sq += err.cwiseProduct(err);
  }
  const auto nd = static_cast<double>(trials);
  ResidualEstimate out;
  out.mean_sq_error = sum / nd;
  out.std_err = std::sqrt(std::max(0.0, (sum_sq / nd - out.mean_sq_error * out.mean_sq_error)) /
                          (nd - 1.0));
  out.bias.resize(dim);
  out.bias_se.resize(dim);
  for (std::size_t t = 0; t < dim; ++t) {
    const double mean = bias_sum[static_cast<Eigen::Index>(t)] / nd;
    const double var = std::max(0.0, bias_sq[static_cast<Eigen::Index>(t)] / nd - mean * mean);
    out.bias[t] = mean;
    out.bias_se[t] = std::sqrt(var / (nd - 1.0));
  }
  return out;
}

double strongly_convex_bound(std::span<const double> cost, std::size_t n, double grad_bound,
                             double lambda, std::size_t t) {
  const double nn = static_cast<double>(n);
  return 4.0 * nn * nn * grad_bound * (1.0 + 1.0 / inverse_cost_sum(cost)) /
         (lambda * lambda * static_cast<double>(t));
}

double smooth_const_bound(std::span<const double> cost, std::size_t n, double grad_bound,
                          double mu, double gap, std::size_t t) {
  const double nn = static_cast<double>(n);
  const double root = std::sqrt(static_cast<double>(t) + 1.0);
  return gap / root + mu * nn * nn * grad_bound * (1.0 + 1.0 / inverse_cost_sum(cost)) / (2.0 * root);
}

double smooth_decay_bound(std::span<const double> cost, std::size_t n, double grad_bound,
                          double mu, double gap, std::size_t t) {
  const double nn = static_cast<double>(n);
  const double root = std::sqrt(static_cast<double>(t) + 1.0);
  return gap / root + mu * nn * nn * grad_bound * (1.0 + std::log(root)) *
                          (1.0 + 1.0 / inverse_cost_sum(cost)) / root;
}

double reference_min_loss(const LossModel& loss, const Eigen::VectorXd& beta0, std::size_t steps) {
  Eigen::VectorXd beta = beta0;
  const double gamma = 1.0 / loss.smoothness();
  double best = loss.loss(beta);
  for (std::size_t s = 0; s < steps; ++s) {
    beta -= gamma * loss.gradient(beta);
    best = std::min(best, loss.loss(beta));
  }
  return best;
}

std::vector<Eigen::VectorXd> gd_trajectory(const LossModel& loss, const Eigen::VectorXd& beta0,
                                           double gamma, std::size_t steps) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(steps + 1);
  out.push_back(beta0);
  for (std::size_t s = 0; s < steps; ++s) out.push_back(out.back() - gamma * loss.gradient(out.back()));
  return out;
}

}  // namespace agc
