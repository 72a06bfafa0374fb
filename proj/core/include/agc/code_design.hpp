// Copyright 2026 The AGC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "agc/rng.hpp"
#include "agc/sparse.hpp"
#include "agc/straggler.hpp"

namespace agc {

/// A realized gradient code for k workers over n data partitions.
///
/// Worker i sends f_i = sum_j encoding(i, j) g_j; the master forms
/// g_hat = sum_i 1{i alive} decoder[i] Q(f_i). alpha(i, j) is the effective
/// weight effective_decoder[i] * encoding(i, j) with
/// effective_decoder[i] = (1 - p_i) decoder[i]. For unbiased designs the
/// columns of alpha sum to one.
struct CodeDesign {
  std::size_t k = 0;
  std::size_t n = 0;
  SparseRows alpha;
  SparseRows encoding;
  std::vector<double> targets;            // Y_i, row sums of alpha
  std::vector<double> decoder;            // w_i
  std::vector<double> effective_decoder;  // (1 - p_i) w_i
  std::vector<double> cost;               // c_i the design was built for
  std::vector<double> p;

  /// Average replication d = nnz(encoding) / n.
  double load() const;
  /// sum_j encoding(i, j).
  double encoding_row_sum(std::size_t i) const { return encoding.row_sum(i); }
};

/// c = p / (1 - p) + eta * phi / (1 - p).
double cost_coeff(double p, double phi, double eta = 1.0);
std::vector<double> cost_coeffs(std::span<const double> p, std::span<const double> phi,
                                double eta = 1.0);

/// Scale that equalizes eta * phi(floor(z_tot / k)) with the mean straggler
/// probability.
double balance_eta(const Profiles& profiles, int z_tot, std::size_t dim);

/// Y_i = n c_i^{-1} / sum_j c_j^{-1}.
std::vector<double> target_masses(std::span<const double> cost, std::size_t n);

/// Lays worker i's mass on the segment [R_{i-1}, R_i] of [0, n] and reads
/// alpha(i, j) as its overlap with [j - 1, j]. At most n + k - 1 nonzeros.
SparseRows segment_construction(std::span<const double> targets, std::size_t n);

/// sum_i c_i (sum_j alpha(i, j))^2.
double structure_objective(const SparseRows& alpha, std::span<const double> cost);

/// Physical coefficients a = alpha / w~, w = w~ / (1 - p) with the given
/// nonzero effective decoders w~.
CodeDesign realize_code(const SparseRows& alpha, const Profiles& profiles,
                        std::span<const double> cost,
                        std::span<const double> effective_decoder);
/// As above with w~_i drawn uniformly from [0.5, 1.5].
CodeDesign realize_code(const SparseRows& alpha, const Profiles& profiles,
                        std::span<const double> cost, Rng& rng);

/// Cost coefficients, target masses, segment construction and realization in
/// one call. bit_widths[i] is worker i's z_i.
CodeDesign optimal_design(const Profiles& profiles, std::span<const int> bit_widths,
                          std::size_t dim, std::size_t n, double eta, Rng& rng);

/// max_j |sum_i (1 - p_i) w_i a_ij - 1|.
double unbiasedness_residual(const CodeDesign& design);

/// n^2 C / sum_i c_i^{-1}.
double residual_error_bound(std::span<const double> cost, std::size_t n, double grad_bound);
/// n^2 C (1 + 1 / sum_i c_i^{-1}).
double estimator_second_moment_bound(std::span<const double> cost, std::size_t n,
                                     double grad_bound);

/// Bias-variance optimal second-moment decoder
///   v_i = n L / ((p_i + phi_i) S_i (1 + L sum_m c_m^{-1})),  S_i = sum_j a_ij,
/// with c_m = (p_m + phi_m) / (1 - p_m). Workers with S_i = 0 get v_i = 0.
std::vector<double> two_track_decoder(const CodeDesign& design, std::span<const double> phi,
                                      double lambda);

struct SecondMomentTerms {
  double bias = 0.0;      // [sum_j (1 - sum_i (1 - p_i) v_i a_ij)]^2
  double variance = 0.0;  // sum_i (1 - p_i)(p_i + phi_i) v_i^2 S_i^2

  double weighted(double lambda) const { return lambda * bias + variance; }
};

SecondMomentTerms second_moment_objective(const CodeDesign& design,
                                          std::span<const double> phi,
                                          std::span<const double> v);

}  // namespace agc
