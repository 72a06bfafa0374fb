// Copyright 2026 The AGC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "agc/baselines.hpp"
#include "agc/code_design.hpp"
#include "agc/rng.hpp"
#include "agc/straggler.hpp"

namespace agc {

enum class LossKind { kQuadratic, kLogistic };

/// A loss L = sum_j L_j over n data partitions.
///
/// QUADRATIC: L_j(b) = 1/2 |A_j b - y_j|^2. LOGISTIC: L_j(b) = sum over the
/// partition's samples of log(1 + exp(-y x.b)) plus rho/(2n) |b|^2.
class LossModel {
 public:
  /// Quadratic from explicit blocks; a[j] is m_j x l, y[j] has m_j rows.
  static LossModel quadratic(std::vector<Eigen::MatrixXd> a, std::vector<Eigen::VectorXd> y);
  /// Random quadratic whose Hessian has smallest eigenvalue exactly
  /// lambda_target and condition number below 2. Each block holds l Gaussian
  /// rows plus sqrt(shift / n) I rows that realize the diagonal shift.
  static LossModel make_quadratic(std::size_t n, std::size_t dim, double lambda_target, Rng& rng);
  /// Binary logistic regression on two unit-variance Gaussian blobs at
  /// +-separation along a random direction, labels +-1 balanced at random.
  static LossModel make_logistic(std::size_t n, std::size_t dim, std::size_t samples_per_partition,
                                 Rng& rng, double l2 = 0.0, double separation = 1.0);
  /// Logistic loss from explicit data; x[j] is s_j x l, labels in {-1, +1}.
  static LossModel logistic(std::vector<Eigen::MatrixXd> x, std::vector<Eigen::VectorXd> labels,
                            double l2 = 0.0);

  LossKind kind() const { return kind_; }
  std::size_t partitions() const { return blocks_.size(); }
  std::size_t dim() const { return dim_; }
  double strong_convexity() const { return lambda_; }
  double smoothness() const { return mu_; }
  /// Known minimizer (QUADRATIC only).
  const std::optional<Eigen::VectorXd>& optimum() const { return optimum_; }

  double loss(const Eigen::VectorXd& beta) const;
  double partition_loss(std::size_t j, const Eigen::VectorXd& beta) const;
  void partition_gradient(std::size_t j, const Eigen::VectorXd& beta,
                          Eigen::Ref<Eigen::VectorXd> out) const;
  /// Column j holds g_j.
  Eigen::MatrixXd partition_gradients(const Eigen::VectorXd& beta) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& beta) const;
  /// Unbiased estimate of g_j from `batch` rows (samples) drawn uniformly
  /// with replacement, scaled by rows / batch. Ridge terms are exact.
  void sampled_partition_gradient(std::size_t j, const Eigen::VectorXd& beta, std::size_t batch,
                                  Rng& rng, Eigen::Ref<Eigen::VectorXd> out) const;
  /// Rows (QUADRATIC) or samples (LOGISTIC) in partition j.
  std::size_t partition_rows(std::size_t j) const;

 private:
  struct Block {
    Eigen::MatrixXd a;  // rows: equations or samples
    Eigen::VectorXd y;  // targets or labels
    Eigen::MatrixXd hess;  // QUADRATIC: a^T a
    Eigen::VectorXd lin;   // QUADRATIC: a^T y
    double offset = 0.0;   // QUADRATIC: |y|^2 / 2
  };

  void finish_quadratic();

  LossKind kind_ = LossKind::kQuadratic;
  std::size_t dim_ = 0;
  std::vector<Block> blocks_;
  double ridge_ = 0.0;  // per-partition ridge (LOGISTIC)
  double lambda_ = 0.0;
  double mu_ = 0.0;
  std::optional<Eigen::VectorXd> optimum_;
};

/// 1.1 max_{beta, j} |g_j(beta)|^2, floored at 1e-12.
double calibrate_C(const LossModel& loss, std::span<const Eigen::VectorXd> samples);

enum class Schedule { kInvLambdaT, kConstSqrt, kDecaySqrt, kFixed };

/// Step size of update t (0-based) in a run of `iterations` updates:
/// 1/(lambda (t+1)), 1/sqrt(iterations + 1), 1/sqrt(t+1), or gamma. The run
/// visits iterations + 1 points, matching the averaging window of the
/// smooth-loss bounds.
struct LrSchedule {
  Schedule kind = Schedule::kFixed;
  double gamma = 0.1;

  double rate(std::size_t t, std::size_t iterations, double lambda) const;
};

enum class OptimizerKind { kGd, kSgd, kAdam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kGd;
  std::size_t batch = 1;  // SGD rows per partition
  double adam_lambda = 1.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Everything a run needs besides the loss. z_tot is the total bit budget for
/// quantized schemes.
struct TrainConfig {
  SchemeSpec scheme;
  Profiles profiles;
  int z_tot = 0;
  double eta = 1.0;
  std::size_t iterations = 100;
  LrSchedule lr;
  OptimizerConfig optimizer;
  std::uint64_t seed = 0;
  std::size_t trials = 1;
  /// Starting point; zeros when empty.
  Eigen::VectorXd beta0;
};

/// The scheme's code, bit widths (empty when unquantized) and the
/// second-moment decoder used by two-track Adam.
struct SchemeInstance {
  SchemeSpec scheme;
  std::optional<CodeDesign> design;  // empty for IDEAL_SGD
  std::vector<int> bit_widths;
  std::vector<double> phi;  // zeros when unquantized
};

SchemeInstance build_scheme(const SchemeSpec& scheme, const Profiles& profiles, std::size_t n,
                            std::size_t dim, int z_tot, double eta, Rng& rng);

/// The aggregated estimate of one iteration.
struct Aggregate {
  Eigen::VectorXd first;   // sum_i 1_i w_i q_i
  Eigen::VectorXd second;  // sum_i 1_i v_i q_i (two-track Adam only)
  std::uint64_t bits = 0;
  std::size_t stragglers = 0;
};

/// Encodes, quantizes, samples stragglers and aggregates one iteration.
/// grads holds g_j as columns. Draws come from substreams of `rng`, which
/// is not advanced; pass a fresh stream per call.
Aggregate aggregate_step(const SchemeInstance& inst, const Profiles& profiles,
                         const Eigen::MatrixXd& grads, const std::vector<double>* second_decoder,
                         Rng& rng);

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  std::size_t step = 0;
};

/// Two-track Adam: m tracks `first`, v tracks second.^2, and
/// beta <- beta - gamma m_hat / (sqrt(v_hat) + eps) with bias correction.
void adam_step_two_track(Eigen::VectorXd& beta, AdamState& state, const Eigen::VectorXd& first,
                         const Eigen::VectorXd& second, double gamma, const OptimizerConfig& hyper);

/// Parameters and optimizer memory of one run.
struct TrainState {
  Eigen::VectorXd beta;
  AdamState adam;
  std::size_t t = 0;  // updates applied
};

/// State beta_t after t updates.
struct StepRecord {
  double loss = 0.0;
  double grad_sq = 0.0;
  double dist_sq = 0.0;     // NaN without a known optimum
  std::uint64_t bits = 0;   // spent by the update that produced beta_t
  std::size_t stragglers = 0;
};

/// One update from the partition gradients at state.beta (exact for GD,
/// sampled for SGD): aggregate, step, advance state.t. Throws kNonFinite if
/// the new parameters are not finite. Returns the update's bits and
/// straggler count; loss fields are left zero.
StepRecord train_step(TrainState& state, const SchemeInstance& inst, const Profiles& profiles,
                      const LossModel& loss, const TrainConfig& config,
                      const Eigen::MatrixXd& grads, const std::vector<double>* second_decoder,
                      Rng& rng);

/// One seeded run of `iterations` updates: iterations + 1 records.
std::vector<StepRecord> run_trial(const LossModel& loss, const TrainConfig& config,
                                  std::size_t trial);

/// Trial-averaged series; entry t describes beta_t.
struct MetricsSeries {
  std::vector<double> mean_loss;
  std::vector<double> se_loss;
  std::vector<double> mean_grad_sq;
  std::vector<double> mean_dist_sq;
  std::vector<double> mean_bits;       // per update, averaged over trials
  std::vector<double> cum_bits;        // running sum of mean_bits
  std::vector<double> mean_stragglers;
  std::size_t trials = 0;

  std::size_t size() const { return mean_loss.size(); }
  /// (1 / (t + 1)) sum_{s <= t} mean_grad_sq[s].
  double running_grad_sq(std::size_t t) const;
};

/// Runs config.trials independent trials keyed by (seed, trial) and averages
/// pointwise. Trials run on worker threads; the result does not depend on
/// the thread count.
MetricsSeries run_experiment(const LossModel& loss, const TrainConfig& config);

enum class NoiseSource { kFull, kStragglerOnly, kQuantizationOnly };

struct ResidualEstimate {
  double mean_sq_error = 0.0;
  double std_err = 0.0;  // of mean_sq_error
  std::vector<double> bias;      // mean of g_hat - g
  std::vector<double> bias_se;   // per coordinate
};

/// Monte Carlo estimate of E|g - g_hat|^2 for fixed partition gradients
/// (columns of grads). kStragglerOnly sends exact f_i; kQuantizationOnly
/// measures |sum_i 1_i w_i (q_i - f_i)|^2.
ResidualEstimate monte_carlo_residual(const CodeDesign& design, std::span<const int> bit_widths,
                                      const Eigen::MatrixXd& grads, std::size_t trials, Rng& rng,
                                      NoiseSource source = NoiseSource::kFull);

/// Strongly convex bound 4 n^2 C (1 + 1/sum c^-1) / (lambda^2 T).
double strongly_convex_bound(std::span<const double> cost, std::size_t n, double grad_bound,
                             double lambda, std::size_t t);
/// Smooth-loss bounds on the average squared gradient norm over T + 1
/// iterates: constant step 1/sqrt(T+1) and decaying step 1/sqrt(t+1).
double smooth_const_bound(std::span<const double> cost, std::size_t n, double grad_bound,
                          double mu, double gap, std::size_t t);
double smooth_decay_bound(std::span<const double> cost, std::size_t n, double grad_bound,
                          double mu, double gap, std::size_t t);

/// Minimum loss over `steps` plain GD steps of size 1/mu from beta0.
double reference_min_loss(const LossModel& loss, const Eigen::VectorXd& beta0, std::size_t steps);

/// Iterates of `steps` exact GD steps of size gamma, including beta0.
std::vector<Eigen::VectorXd> gd_trajectory(const LossModel& loss, const Eigen::VectorXd& beta0,
                                           double gamma, std::size_t steps);

}  // namespace agc
