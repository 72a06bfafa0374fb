// Copyright 2026 The AGC Authors
// SPDX-License-Identifier: Apache-2.0

#include "agc/quantizer.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <string>

#include "agc/error.hpp"

namespace agc {
namespace {

void check_bit_width(int z, int max_z) {
  if (z < kMinBitWidth || z > max_z) {
    throw Error(ErrorKind::kInvalidBitWidth,
                "bit width " + std::to_string(z) + " outside [2, " +
                    std::to_string(max_z) + "]");
  }
}

class BitWriter {
 public:
  explicit BitWriter(std::vector<std::uint8_t>& out) : out_(out) {}

  void put(std::uint32_t value, int nbits) {
    for (int b = nbits - 1; b >= 0; --b) {
      if (used_ == 0) out_.push_back(0);
      if ((value >> b) & 1U) out_.back() |= static_cast<std::uint8_t>(0x80U >> used_);
      used_ = (used_ + 1) % 8;
    }
  }

 private:
  std::vector<std::uint8_t>& out_;
  int used_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint32_t get(int nbits) {
    std::uint32_t v = 0;
    for (int b = 0; b < nbits; ++b) {
      const std::uint8_t byte = in_[pos_ / 8];
      v = (v << 1) | ((byte >> (7 - pos_ % 8)) & 1U);
      ++pos_;
    }
    return v;
  }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint32_t level_count(int bit_width) {
  check_bit_width(bit_width, kMaxBitWidth);
  return static_cast<std::uint32_t>((std::uint64_t{1} << (bit_width - 1)) - 1);
}

double variance_coeff(int bit_width, std::size_t dim) {
  if (bit_width < kMinBitWidth) {
    throw Error(ErrorKind::kInvalidBitWidth,
                "bit width " + std::to_string(bit_width) + " < 2 has no magnitude level");
  }
  if (dim == 0) throw Error(ErrorKind::kInvalidInput, "dimension must be >= 1");
  const double s = std::ldexp(1.0, bit_width - 1) - 1.0;
  return static_cast<double>(dim) / (4.0 * s * s);
}

void validate(const QuantizedMessage& msg) {
  check_bit_width(msg.bit_width, kMaxBitWidth);
  const std::uint32_t s = level_count(msg.bit_width);
  if (msg.signs.size() != msg.levels.size()) {
    throw Error(ErrorKind::kInvalidInput, "signs/levels length mismatch");
  }
  if (!(msg.norm >= 0.0) || !std::isfinite(msg.norm)) {
    throw Error(ErrorKind::kInvalidInput, "norm must be finite and >= 0");
  }
  for (std::size_t m = 0; m < msg.levels.size(); ++m) {
    if (msg.levels[m] > s) throw Error(ErrorKind::kInvalidInput, "level exceeds s");
    if (msg.signs[m] != 1 && msg.signs[m] != -1) {
      throw Error(ErrorKind::kInvalidInput, "sign must be +1 or -1");
    }
    if (msg.norm == 0.0 && msg.levels[m] != 0) {
      throw Error(ErrorKind::kInvalidInput, "zero norm requires zero levels");
    }
  }
}

QuantizedMessage quantize(std::span<const double> x, int bit_width, Rng& rng) {
  const std::uint32_t s = level_count(bit_width);
  double sq = 0.0;
  for (double v : x) {
    if (!std::isfinite(v)) throw Error(ErrorKind::kInvalidInput, "non-finite input");
    sq += v * v;
  }
  QuantizedMessage msg;
  msg.bit_width = bit_width;
  msg.norm = std::sqrt(sq);
  msg.signs.assign(x.size(), 1);
  msg.levels.assign(x.size(), 0);
  const double scale = msg.norm > 0.0 ? static_cast<double>(s) / msg.norm : 0.0;
  for (std::size_t m = 0; m < x.size(); ++m) {
    const double draw = rng.uniform();
    if (msg.norm == 0.0) continue;
    if (x[m] < 0.0) msg.signs[m] = -1;
    const double su = std::abs(x[m]) * scale;
    const double lower = std::floor(su);
    auto level = static_cast<std::uint32_t>(lower);
    if (draw < su - lower) ++level;
    msg.levels[m] = level > s ? s : level;
  }
  return msg;
}

std::vector<double> dequantize(const QuantizedMessage& msg) {
  std::vector<double> out(msg.dim(), 0.0);
  accumulate_dequantized(msg, 1.0, out);
  return out;
}

void accumulate_dequantized(const QuantizedMessage& msg, double weight,
                            std::span<double> acc) {
  if (acc.size() != msg.dim()) {
    throw Error(ErrorKind::kInvalidInput, "accumulator dimension mismatch");
  }
  if (msg.norm == 0.0) return;
  const double unit = weight * msg.norm / static_cast<double>(level_count(msg.bit_width));
  for (std::size_t m = 0; m < msg.dim(); ++m) {
    acc[m] += unit * msg.signs[m] * static_cast<double>(msg.levels[m]);
  }
}

std::size_t payload_bytes(int bit_width, std::size_t dim) {
  check_bit_width(bit_width, kMaxBitWidth);
  return 4 + (dim * static_cast<std::size_t>(bit_width) + 7) / 8;
}

std::uint64_t payload_bits(int bit_width, std::size_t dim) {
  return 32 + static_cast<std::uint64_t>(dim) * static_cast<std::uint64_t>(bit_width);
}

std::vector<std::uint8_t> pack(const QuantizedMessage& msg) {
  validate(msg);
  std::vector<std::uint8_t> out;
  out.reserve(payload_bytes(msg.bit_width, msg.dim()));
  const auto word = std::bit_cast<std::uint32_t>(static_cast<float>(msg.norm));
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(word >> (8 * b)));
  BitWriter writer(out);
  for (std::size_t m = 0; m < msg.dim(); ++m) {
    writer.put(msg.signs[m] < 0 ? 1U : 0U, 1);
    writer.put(msg.levels[m], msg.bit_width - 1);
  }
  return out;
}

QuantizedMessage unpack(std::span<const std::uint8_t> bytes, int bit_width,
                        std::size_t dim) {
  const std::size_t need = payload_bytes(bit_width, dim);
  if (bytes.size() < need) {
    throw Error(ErrorKind::kDecode, "truncated message: need " + std::to_string(need) +
                                        " bytes, got " + std::to_string(bytes.size()));
  }
  std::uint32_t word = 0;
  for (int b = 0; b < 4; ++b) word |= static_cast<std::uint32_t>(bytes[b]) << (8 * b);
  QuantizedMessage msg;
  msg.bit_width = bit_width;
  msg.norm = static_cast<double>(std::bit_cast<float>(word));
  msg.signs.resize(dim);
  msg.levels.resize(dim);
  BitReader reader(bytes.subspan(4));
  for (std::size_t m = 0; m < dim; ++m) {
    msg.signs[m] = reader.get(1) ? -1 : 1;
    msg.levels[m] = reader.get(bit_width - 1);
  }
  try {
    validate(msg);
  } catch (const Error& e) {
    throw Error(ErrorKind::kDecode, std::string("malformed message: ") + e.what());
  }
  return msg;
}

}  // namespace agc
