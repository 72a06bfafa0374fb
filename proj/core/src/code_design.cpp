// Copyright 2026 The AGC Authors
// SPDX-License-Identifier: Apache-2.0

#include "agc/code_design.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "agc/error.hpp"
#include "agc/quantizer.hpp"

namespace agc {
namespace {

constexpr double kDropTolerance = 1e-12;
constexpr double kMassTolerance = 1e-9;

double inverse_cost_sum(std::span<const double> cost) {
  double s = 0.0;
  for (double c : cost) {
    if (!(c > 0.0)) throw Error(ErrorKind::kInvalidCost, "cost coefficients must be > 0");
    s += 1.0 / c;
  }
  return s;
}

void check_alpha_shape(const SparseRows& alpha, const Profiles& profiles,
                       std::span<const double> cost) {
  if (alpha.rows() != profiles.size() || cost.size() != profiles.size()) {
    throw Error(ErrorKind::kInvalidInput, "alpha rows, profiles and costs disagree on k");
  }
}

}  // namespace

double CodeDesign::load() const {
  return n == 0 ? 0.0 : static_cast<double>(encoding.nnz()) / static_cast<double>(n);
}

double cost_coeff(double p, double phi, double eta) {
  if (!(p < 1.0)) throw Error(ErrorKind::kDegenerateWorker, "p must be < 1");
  if (!(p >= 0.0) || !(phi >= 0.0) || !(eta > 0.0)) {
    throw Error(ErrorKind::kInvalidInput, "need p >= 0, phi >= 0, eta > 0");
  }
  return p / (1.0 - p) + eta * phi / (1.0 - p);
}

std::vector<double> cost_coeffs(std::span<const double> p, std::span<const double> phi,
                                double eta) {
  if (p.size() != phi.size()) throw Error(ErrorKind::kInvalidInput, "p/phi length mismatch");
  std::vector<double> c(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) c[i] = cost_coeff(p[i], phi[i], eta);
  return c;
}

double balance_eta(const Profiles& profiles, int z_tot, std::size_t dim) {
  const auto k = static_cast<int>(profiles.size());
  if (k == 0) throw Error(ErrorKind::kInvalidInput, "no workers");
  if (z_tot < 2 * k) {
    throw Error(ErrorKind::kInfeasibleBudget,
                "Z_tot = " + std::to_string(z_tot) + " < 2k = " + std::to_string(2 * k));
  }
  double mean_p = 0.0;
  for (const auto& w : profiles) mean_p += w.p();
  mean_p /= k;
  return mean_p / variance_coeff(z_tot / k, dim);
}

std::vector<double> target_masses(std::span<const double> cost, std::size_t n) {
  if (n == 0) throw Error(ErrorKind::kInvalidInput, "n must be >= 1");
  const double inv_sum = inverse_cost_sum(cost);
  std::vector<double> y(cost.size());
  for (std::size_t i = 0; i < cost.size(); ++i) {
    y[i] = static_cast<double>(n) / (cost[i] * inv_sum);
  }
  return y;
}

SparseRows segment_construction(std::span<const double> targets, std::size_t n) {
  const std::size_t k = targets.size();
  if (k == 0 || n == 0) throw Error(ErrorKind::kInvalidInput, "need k, n >= 1");
  double total = 0.0;
  for (double y : targets) {
    if (!(y > 0.0)) throw Error(ErrorKind::kInvalidMass, "target masses must be > 0");
    total += y;
  }
  if (std::abs(total - static_cast<double>(n)) >= kMassTolerance) {
    throw Error(ErrorKind::kInvalidMass, "target masses sum to " + std::to_string(total) +
                                             ", expected " + std::to_string(n));
  }
  // Segment boundaries R_0 = 0 < R_1 < ... < R_k = n; the last is pinned to
  // n so that the final partition is fully covered.
  std::vector<double> bound(k + 1, 0.0);
  for (std::size_t i = 0; i < k; ++i) bound[i + 1] = bound[i] + targets[i];
  bound[k] = static_cast<double>(n);

  SparseRows alpha(k, n);
  std::vector<std::pair<std::size_t, double>> column;
  std::size_t first = 0;  // first worker whose segment may reach column j
  for (std::size_t j = 0; j < n; ++j) {
    const double lo = static_cast<double>(j);
    const double hi = lo + 1.0;
    column.clear();
    while (first < k && bound[first + 1] <= lo) ++first;
    double dropped = 0.0;
    for (std::size_t i = first; i < k && bound[i] < hi; ++i) {
      const double overlap = std::min(bound[i + 1], hi) - std::max(bound[i], lo);
      if (overlap <= 0.0) continue;
      if (overlap < kDropTolerance) {
        dropped += overlap;
      } else {
        column.emplace_back(i, overlap);
      }
    }
    if (column.empty()) throw Error(ErrorKind::kInvalidMass, "uncovered partition");
    if (dropped > 0.0) {
      auto big = std::max_element(column.begin(), column.end(),
                                  [](const auto& a, const auto& b) { return a.second < b.second; });
      big->second += dropped;
    }
    for (const auto& [i, v] : column) alpha.push(i, j, v);
  }
  return alpha;
}

double structure_objective(const SparseRows& alpha, std::span<const double> cost) {
  double f = 0.0;
  for (std::size_t i = 0; i < alpha.rows(); ++i) {
    const double y = alpha.row_sum(i);
    f += cost[i] * y * y;
  }
  return f;
}

CodeDesign realize_code(const SparseRows& alpha, const Profiles& profiles,
                        std::span<const double> cost,
                        std::span<const double> effective_decoder) {
  check_alpha_shape(alpha, profiles, cost);
  if (effective_decoder.size() != profiles.size()) {
    throw Error(ErrorKind::kInvalidInput, "effective decoder length mismatch");
  }
  CodeDesign d;
  d.k = alpha.rows();
  d.n = alpha.cols();
  d.alpha = alpha;
  d.encoding = SparseRows(d.k, d.n);
  d.p = probabilities(profiles);
  d.cost.assign(cost.begin(), cost.end());
  d.effective_decoder.assign(effective_decoder.begin(), effective_decoder.end());
  d.decoder.resize(d.k);
  d.targets.resize(d.k);
  for (std::size_t i = 0; i < d.k; ++i) {
    const double tw = effective_decoder[i];
    if (tw == 0.0 || !std::isfinite(tw)) {
      throw Error(ErrorKind::kInvalidInput, "effective decoders must be finite and nonzero");
    }
    d.decoder[i] = tw / (1.0 - d.p[i]);
    d.targets[i] = alpha.row_sum(i);
    for (const auto& e : alpha.row(i)) d.encoding.push(i, e.col, e.value / tw);
  }
  return d;
}

CodeDesign realize_code(const SparseRows& alpha, const Profiles& profiles,
                        std::span<const double> cost, Rng& rng) {
  std::vector<double> tw(alpha.rows());
  for (double& v : tw) v = rng.uniform(0.5, 1.5);
  return realize_code(alpha, profiles, cost, tw);
}

CodeDesign optimal_design(const Profiles& profiles, std::span<const int> bit_widths,
                          std::size_t dim, std::size_t n, double eta, Rng& rng) {
  if (bit_widths.size() != profiles.size()) {
    throw Error(ErrorKind::kInvalidInput, "one bit width per worker required");
  }
  std::vector<double> phi(profiles.size());
  for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = variance_coeff(bit_widths[i], dim);
  const auto p = probabilities(profiles);
  const auto c = cost_coeffs(p, phi, eta);
  const auto y = target_masses(c, n);
  return realize_code(segment_construction(y, n), profiles, c, rng);
}

double unbiasedness_residual(const CodeDesign& design) {
  std::vector<double> col(design.n, 0.0);
  for (std::size_t i = 0; i < design.k; ++i) {
    const double scale = (1.0 - design.p[i]) * design.decoder[i];
    for (const auto& e : design.encoding.row(i)) col[e.col] += scale * e.value;
  }
  double worst = 0.0;
  for (double s : col) worst = std::max(worst, std::abs(s - 1.0));
  return worst;
}

double residual_error_bound(std::span<const double> cost, std::size_t n, double grad_bound) {
  const double nn = static_cast<double>(n);
  return nn * nn * grad_bound / inverse_cost_sum(cost);
}

double estimator_second_moment_bound(std::span<const double> cost, std::size_t n,
                                     double grad_bound) {
  const double nn = static_cast<double>(n);
  return nn * nn * grad_bound * (1.0 + 1.0 / inverse_cost_sum(cost));
}

std::vector<double> two_track_decoder(const CodeDesign& design, std::span<const double> phi,
                                      double lambda) {
  if (!(lambda >= 0.0)) throw Error(ErrorKind::kInvalidInput, "Lambda must be >= 0");
  if (phi.size() != design.k) throw Error(ErrorKind::kInvalidInput, "phi length mismatch");
  const auto c = cost_coeffs(design.p, phi, 1.0);
  const double inv_sum = inverse_cost_sum(c);
  const double nn = static_cast<double>(design.n);
  std::vector<double> v(design.k, 0.0);
  for (std::size_t i = 0; i < design.k; ++i) {
    const double s = design.encoding_row_sum(i);
    if (s == 0.0) continue;
    v[i] = nn * lambda / ((design.p[i] + phi[i]) * s * (1.0 + lambda * inv_sum));
  }
  return v;
}

SecondMomentTerms second_moment_objective(const CodeDesign& design,
                                          std::span<const double> phi,
                                          std::span<const double> v) {
  if (phi.size() != design.k || v.size() != design.k) {
    throw Error(ErrorKind::kInvalidInput, "phi/v length mismatch");
  }
  SecondMomentTerms t;
  double residual = static_cast<double>(design.n);
  for (std::size_t i = 0; i < design.k; ++i) {
    const double s = design.encoding_row_sum(i);
    const double q = 1.0 - design.p[i];
    residual -= q * v[i] * s;
    t.variance += q * (design.p[i] + phi[i]) * v[i] * v[i] * s * s;
  }
  t.bias = residual * residual;
  return t;
}

}  // namespace agc
