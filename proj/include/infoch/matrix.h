//
// Copyright 2026 The infoch Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef INFOCH_MATRIX_H_
#define INFOCH_MATRIX_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"

namespace infoch {

// Dense row-major matrix of doubles. Used both for datasets (one sample per
// row) and for square covariance matrices.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix Identity(std::size_t n);
  static Matrix Diagonal(std::span<const double> diag);
  // Builds a 1 x n row matrix.
  static Matrix Row(std::span<const double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return values_.empty(); }
  bool is_square() const { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) {
    return values_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return values_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {values_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols_, cols_};
  }
  std::vector<double> column(std::size_t c) const;

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  Matrix Transpose() const;
  double Trace() const;
  double FrobeniusNorm() const;
  double MaxAbs() const;
  bool AllFinite() const;

  // Returns the submatrix with the given row and column index lists.
  Matrix Select(std::span<const std::size_t> row_idx,
                std::span<const std::size_t> col_idx) const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);

std::vector<double> MatVec(const Matrix& a, std::span<const double> x);
double Dot(std::span<const double> a, std::span<const double> b);
double Norm(std::span<const double> a);

// Plain-text matrix format: one row per line, comma-separated decimals, no
// header. Values are written with 17 significant digits.
absl::StatusOr<Matrix> ParseMatrixCsv(absl::string_view text);
std::string FormatMatrixCsv(const Matrix& m);
absl::StatusOr<Matrix> ReadMatrixCsv(const std::string& path);

// Formats a double with 17 significant digits ("%.17g").
std::string FormatDouble(double v);

}  // namespace infoch

#endif  // INFOCH_MATRIX_H_
