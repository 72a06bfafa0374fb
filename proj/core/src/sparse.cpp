// Copyright 2026 The AGC Authors
// SPDX-License-Identifier: Apache-2.0

#include "agc/sparse.hpp"

#include <algorithm>

#include "agc/error.hpp"

namespace agc {

void SparseRows::push(std::size_t row, std::size_t col, double value) {
  if (row >= data_.size() || col >= cols_) {
    throw Error(ErrorKind::kInvalidInput, "sparse index out of range");
  }
  auto& r = data_[row];
  if (!r.empty() && r.back().col >= col) {
    throw Error(ErrorKind::kInvalidInput, "sparse columns must increase within a row");
  }
  r.push_back({col, value});
}

std::size_t SparseRows::nnz() const {
  std::size_t total = 0;
  for (const auto& r : data_) total += r.size();
  return total;
}

double SparseRows::at(std::size_t i, std::size_t j) const {
  const auto& r = data_.at(i);
  auto it = std::lower_bound(r.begin(), r.end(), j,
                             [](const SparseEntry& e, std::size_t c) { return e.col < c; });
  return (it != r.end() && it->col == j) ? it->value : 0.0;
}

double SparseRows::row_sum(std::size_t i) const {
  double s = 0.0;
  for (const auto& e : data_.at(i)) s += e.value;
  return s;
}

std::vector<double> SparseRows::col_sums() const {
  std::vector<double> s(cols_, 0.0);
  for (const auto& r : data_) {
    for (const auto& e : r) s[e.col] += e.value;
  }
  return s;
}

std::vector<std::vector<double>> SparseRows::to_dense() const {
  std::vector<std::vector<double>> d(rows(), std::vector<double>(cols_, 0.0));
  for (std::size_t i = 0; i < rows(); ++i) {
    for (const auto& e : data_[i]) d[i][e.col] = e.value;
  }
  return d;
}

}  // namespace agc
