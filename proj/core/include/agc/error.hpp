// Copyright 2026 The AGC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace agc {

enum class ErrorKind {
  kInvalidBitWidth,
  kInvalidInput,
  kDecode,
  kInvalidThreshold,
  kDegenerateWorker,
  kInfeasibleBudget,
  kInvalidCost,
  kInvalidMass,
  kInstanceTooLarge,
  kInfeasible,
  kNonFinite,
  kConfig,
};

std::string_view to_string(ErrorKind kind);

// Every recoverable failure in the library is reported through this type;
// callers branch on kind() rather than on the message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace agc
