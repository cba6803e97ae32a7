// Copyright 2026 The PyramidNet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pyramidnet/error.hpp"

namespace pyramidnet {

using Vec = std::vector<double>;

/// Dense row-major matrix of doubles.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Mat identity(std::size_t n);
  static Mat diagonal(std::span<const double> diag);
  /// Builds from nested rows; all rows must have the same length.
  static Mat from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  Vec column(std::size_t c) const;

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  Mat transposed() const;

  bool operator==(const Mat&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Mat matmul(const Mat& a, const Mat& b);
Vec matvec(const Mat& a, std::span<const double> x);
/// a^T x without forming the transpose.
Vec matvec_transposed(const Mat& a, std::span<const double> x);
Mat add(const Mat& a, const Mat& b);
Mat subtract(const Mat& a, const Mat& b);
Mat scaled(const Mat& a, double factor);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);

/// Largest absolute entry of a - b. Shapes must agree.
double max_abs_diff(const Mat& a, const Mat& b);
double max_abs_diff(std::span<const double> a, std::span<const double> b);

/// max |W^T W - I| over entries, the deviation measure used everywhere for
/// orthogonality (columns orthonormal).
double orthogonality_deviation(const Mat& w);
/// max |W W^T - I|; rows orthonormal (rectangular layers).
double row_orthogonality_deviation(const Mat& w);

/// Determinant by partial-pivot elimination.
double determinant(const Mat& a);

bool all_finite(std::span<const double> v);

struct QrResult {
  Mat q;
  Mat r;
};

/// QR of a square, full-rank matrix by modified Gram-Schmidt with one
/// re-orthogonalisation pass. R has a positive diagonal. Throws DomainError
/// when a pivot falls below 1e-12 (relative to the column norm).
QrResult qr(const Mat& a);

struct SvdResult {
  Mat u;
  Vec s;  // descending, non-negative
  Mat v;
};

/// SVD of a square matrix by one-sided (Hestenes) Jacobi.
///
/// Converges when every pair's normalised inner product is below 1e-12 in a
/// full sweep; throws ConvergenceError after `max_sweeps`. Columns of U that
/// belong to zero singular values are completed to an orthonormal basis.
SvdResult svd(const Mat& a, int max_sweeps = 60);

struct EighResult {
  Vec values;  // descending
  Mat vectors;  // eigenvector k is column k
};

/// Symmetric eigendecomposition by cyclic Jacobi. Throws DomainError if `a`
/// is not symmetric within 1e-10 (relative to its largest entry).
EighResult eigh(const Mat& a, int max_sweeps = 100);

}  // namespace pyramidnet
