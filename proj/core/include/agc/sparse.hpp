// Copyright 2026 The AGC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace agc {

struct SparseEntry {
  std::size_t col;
  double value;

  bool operator==(const SparseEntry&) const = default;
};

/// Row-major coordinate lists; each row is sorted by column.
class SparseRows {
 public:
  SparseRows() = default;
  SparseRows(std::size_t rows, std::size_t cols) : cols_(cols), data_(rows) {}

  /// Appends (row, col) = value. Columns must be pushed in increasing order
  /// within a row.
  void push(std::size_t row, std::size_t col, double value);

  std::size_t rows() const { return data_.size(); }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const;

  std::span<const SparseEntry> row(std::size_t i) const { return data_[i]; }
  double at(std::size_t i, std::size_t j) const;
  double row_sum(std::size_t i) const;
  std::vector<double> col_sums() const;
  std::vector<std::vector<double>> to_dense() const;

  bool operator==(const SparseRows&) const = default;

 private:
  std::size_t cols_ = 0;
  std::vector<std::vector<SparseEntry>> data_;
};

}  // namespace agc
