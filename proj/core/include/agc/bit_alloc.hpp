// Copyright 2026 The AGC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace agc {

/// Residual-bit allocation: worker i quantizes at z_i = r_i + 2 bits and the
/// r_i sum to the residual budget Z_res = Z_tot - 2k.
struct BitAllocation {
  std::vector<int> residual;
  int residual_budget = 0;
  double objective = 0.0;  // F(r) = sum_i h_i(r_i)

  std::vector<int> bit_widths() const;
};

/// h(r) = (1 - p) / (p + phi(r + 2)), the per-worker utility of r residual bits.
double utility(double p, int r, std::size_t dim);

/// F(r) summed in worker order; every solver reports its objective this way.
double allocation_objective(std::span<const double> p, std::span<const int> r,
                            std::size_t dim);

/// Exact optimum by the recurrence V[i, r] = max_a V[i-1, r-a] + h_i(a).
/// Ties in the inner max go to the smallest a.
BitAllocation dp_allocate(std::span<const double> p, std::size_t dim, int z_res);

/// Enumerates every weak composition of z_res into k parts. Throws
/// Error(kInstanceTooLarge) when there are more than 10^7 of them.
BitAllocation exhaustive_oracle(std::span<const double> p, std::size_t dim, int z_res);

struct LagrangianResult {
  std::vector<int> residual;         // integer allocation, sums to budget
  std::vector<double> continuous;    // relaxed solution before rounding
  double multiplier = 0.0;
  bool fallback = false;             // bracketing failed; equal split used
};

/// Continuous relaxation over the given workers, equalizing dh_i/dr at a
/// common multiplier found by a safeguarded root search, then rounded by largest remainder.
LagrangianResult lagrangian_allocate(std::span<const double> p, std::size_t dim,
                                     int budget);

/// First budget % count workers receive one extra bit.
std::vector<int> equal_allocate(std::size_t count, int budget);

/// Steepest-ascent one-bit swaps until no swap has positive gain (or the
/// 10 k Z_res round cap is hit). Preserves the total.
std::vector<int> local_search_refine(std::vector<int> r, std::span<const double> p,
                                     std::size_t dim);

/// Low-complexity hybrid: for each top-kappa set of the most reliable
/// workers, take the better of the Lagrangian and equal splits, refine by
/// local search, and keep the best candidate over kappa.
BitAllocation proposed_allocate(std::span<const double> p, std::size_t dim, int z_res);

/// Grants bits one at a time to the largest marginal gain (lowest index on
/// ties).
BitAllocation greedy_allocate(std::span<const double> p, std::size_t dim, int z_res);

/// Whole-vector convenience wrappers used by baselines and the CLI.
BitAllocation equal_allocation(std::span<const double> p, std::size_t dim, int z_res);
BitAllocation lagrangian_allocation(std::span<const double> p, std::size_t dim, int z_res);

}  // namespace agc
