// Copyright 2026 The AGC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agc/bit_alloc.hpp"
#include "agc/code_design.hpp"
#include "agc/rng.hpp"
#include "agc/straggler.hpp"

namespace agc {

enum class SchemeKind { kIdealSgd, kIsSgd, kBgc, kSgc, kOsgcEqualBits, kProposed };

/// A coding scheme and its parameters. d is the replication parameter of BGC
/// (sampling rate d / k) and SGC (copies per partition).
struct SchemeSpec {
  SchemeKind kind = SchemeKind::kProposed;
  double d = 2.0;

  /// "ideal_sgd", "is_sgd", "bgc", "sgc", "osgc_equalbits", "proposed",
  /// optionally followed by ":d=VALUE". EHD and OD are rejected.
  static SchemeSpec parse(std::string_view text);
  /// Canonical spelling; BGC and SGC carry ":d=VALUE".
  std::string name() const;
  /// Checks the parameters against k workers (BGC: 0 < d/k <= 1; SGC: d an
  /// integer in [1, k]).
  void validate(std::size_t k) const;
  /// Whether the scheme quantizes worker messages.
  bool quantized() const;

  bool operator==(const SchemeSpec&) const = default;
};

/// Partition j goes to worker ceil((j + 1) k / n) - 1 with a = 1 and w = 1.
/// Biased whenever some p_i > 0.
CodeDesign issgd_design(const Profiles& profiles, std::size_t n);

/// a_ij ~ Bernoulli(d / k) independently, w = 1. Draws row by row.
CodeDesign bgc_design(const Profiles& profiles, std::size_t n, double d, Rng& rng);

/// Partition j is held by workers (j + t) mod k for t < d_j with
/// a_ij = 1 / (d_j (1 - p_i)) and w = 1, which is unbiased.
CodeDesign sgc_design(const Profiles& profiles, std::size_t n, std::span<const int> copies);
/// Uniform replication d_j = d.
CodeDesign sgc_design(const Profiles& profiles, std::size_t n, int d);

/// Equal bit widths floor(z_tot / k), remainder one bit each to the
/// lowest-p workers (stable in worker order).
std::vector<int> equal_bit_widths(const Profiles& profiles, int z_tot);

struct QuantizedDesign {
  CodeDesign design;
  std::vector<int> bit_widths;
};

/// Segment-constructed design for c = p / (1 - p), quantized afterwards at
/// equal bit widths.
QuantizedDesign osgc_equalbits_design(const Profiles& profiles, std::size_t n, int z_tot,
                                      Rng& rng);

/// Low-complexity bit allocation of z_tot - 2k residual bits followed by the
/// matched segment-constructed design.
QuantizedDesign proposed_design(const Profiles& profiles, std::size_t n, int z_tot,
                                std::size_t dim, double eta, Rng& rng);

/// sum_j (sum_i (1 - p_i) w_i a_ij - 1) g_j for partition gradients g_j
/// stored row-major (n x dim): the estimator's expected error.
std::vector<double> expected_bias(const CodeDesign& design, std::span<const double> grads,
                                  std::size_t dim);

}  // namespace agc
