// Copyright 2026 The AGC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "agc/rng.hpp"

namespace agc {

inline constexpr int kMinBitWidth = 2;
/// Level indices are stored in 32-bit words; z - 1 level bits must fit.
inline constexpr int kMaxBitWidth = 32;

/// A vector compressed by the norm-sign-level stochastic quantizer.
///
/// Coordinate m decodes to norm * signs[m] * levels[m] / s with
/// s = 2^(z-1) - 1. Zero-norm messages carry all-zero levels and + signs.
struct QuantizedMessage {
  double norm = 0.0;
  std::vector<std::int8_t> signs;
  std::vector<std::uint32_t> levels;
  int bit_width = kMinBitWidth;

  std::size_t dim() const { return levels.size(); }

  bool operator==(const QuantizedMessage&) const = default;
};

/// Number of nonzero magnitude levels s = 2^(z-1) - 1.
std::uint32_t level_count(int bit_width);

/// Worst-case relative variance phi(z) = l / (4 (2^(z-1) - 1)^2), so that
/// E||Q(x) - x||^2 <= phi(z) ||x||^2.
double variance_coeff(int bit_width, std::size_t dim);

/// Throws Error(kInvalidInput) if the message breaks a structural invariant.
void validate(const QuantizedMessage& msg);

/// Stochastic rounding of |x_m| / ||x|| onto the grid {0, 1/s, ..., 1}.
/// Exactly one uniform draw is consumed per coordinate, zero vectors included.
QuantizedMessage quantize(std::span<const double> x, int bit_width, Rng& rng);

std::vector<double> dequantize(const QuantizedMessage& msg);

/// acc += weight * dequantize(msg), without the temporary.
void accumulate_dequantized(const QuantizedMessage& msg, double weight,
                            std::span<double> acc);

/// Wire size in bytes: 4 (norm, binary32 LE) + ceil(dim * z / 8).
std::size_t payload_bytes(int bit_width, std::size_t dim);
/// Bits charged for one message: 32 + dim * z (padding excluded).
std::uint64_t payload_bits(int bit_width, std::size_t dim);

/// Wire layout: binary32 little-endian norm, then per coordinate one sign bit
/// (1 = negative) followed by z - 1 level bits, most significant first,
/// packed MSB-first into bytes; the final byte is zero padded.
std::vector<std::uint8_t> pack(const QuantizedMessage& msg);
QuantizedMessage unpack(std::span<const std::uint8_t> bytes, int bit_width,
                        std::size_t dim);

}  // namespace agc
