// Copyright 2026 The AGC Authors
// SPDX-License-Identifier: Apache-2.0

#include "agc/error.hpp"

namespace agc {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidBitWidth: return "invalid-bit-width";
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kDecode: return "decode";
    case ErrorKind::kInvalidThreshold: return "invalid-threshold";
    case ErrorKind::kDegenerateWorker: return "degenerate-worker";
    case ErrorKind::kInfeasibleBudget: return "infeasible-budget";
    case ErrorKind::kInvalidCost: return "invalid-cost";
    case ErrorKind::kInvalidMass: return "invalid-mass";
    case ErrorKind::kInstanceTooLarge: return "instance-too-large";
    case ErrorKind::kInfeasible: return "infeasible";
    case ErrorKind::kNonFinite: return "non-finite";
    case ErrorKind::kConfig: return "config";
  }
  return "unknown";
}

}  // namespace agc
