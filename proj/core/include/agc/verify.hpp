// Copyright 2026 The AGC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace agc {

/// Outcome of one acceptance check.
struct CheckResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string measured;  // what was observed against which bound
  double seconds = 0.0;
};

struct VerifyOptions {
  std::uint64_t seed = 20260101;
  /// Replaces the variance coefficient used for designs and bounds (the
  /// quantizer itself is untouched). Used to show that the error-bound check
  /// catches a wrong formula.
  std::function<double(int bit_width, std::size_t dim)> phi_override;
  /// Progress lines go here when set.
  std::function<void(const std::string&)> log;
};

CheckResult check_dp_optimality(const VerifyOptions& opt);
CheckResult check_proposed_near_optimal(const VerifyOptions& opt);
CheckResult check_design_structure(const VerifyOptions& opt);
CheckResult check_error_bound(const VerifyOptions& opt);
CheckResult check_quantizer(const VerifyOptions& opt);
CheckResult check_strongly_convex(const VerifyOptions& opt);
CheckResult check_smooth(const VerifyOptions& opt);
CheckResult check_two_track(const VerifyOptions& opt);
CheckResult check_ordering(const VerifyOptions& opt);
CheckResult check_bits(const VerifyOptions& opt);

/// Check ids 1..10 in order.
std::vector<int> check_ids();
CheckResult run_check(int id, const VerifyOptions& opt);

}  // namespace agc
