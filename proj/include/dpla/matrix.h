// Copyright 2026 The dp-la Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPLA_MATRIX_H_
#define DPLA_MATRIX_H_

#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace dpla {

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(size_t rows, size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix FromRows(const std::vector<std::vector<double>>& rows) {
    Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (size_t i = 0; i < rows.size(); ++i) {
      assert(rows[i].size() == m.cols_);
      for (size_t j = 0; j < m.cols_; ++j) m(i, j) = rows[i][j];
    }
    return m;
  }

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(size_t i, size_t j) { return data_[i * cols_ + j]; }
  double operator()(size_t i, size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> Row(size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<double> MutableRow(size_t i) {
    return {data_.data() + i * cols_, cols_};
  }

  std::span<const double> data() const { return data_; }
  std::span<double> mutable_data() { return data_; }

  // Copies the listed rows, in order.
  Matrix SelectRows(std::span<const size_t> indices) const {
    Matrix out(indices.size(), cols_);
    for (size_t r = 0; r < indices.size(); ++r) {
      auto src = Row(indices[r]);
      auto dst = out.MutableRow(r);
      for (size_t j = 0; j < cols_; ++j) dst[j] = src[j];
    }
    return out;
  }

  bool AllFinite() const {
    for (double v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  size_t rows_ = 0;
  size_t cols_ = 0;
  std::vector<double> data_;
};

inline double Dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double sum = 0.0;
  for (size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

inline double SquaredNorm(std::span<const double> a) { return Dot(a, a); }

template <typename T>
std::vector<T> SelectElements(const std::vector<T>& values,
                              std::span<const size_t> indices) {
  std::vector<T> out;
  out.reserve(indices.size());
  for (size_t i : indices) out.push_back(values[i]);
  return out;
}

}  // namespace dpla

#endif  // DPLA_MATRIX_H_
