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

#include "pyramidnet/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace pyramidnet {

namespace {

void require_same_shape(const Mat& a, const Mat& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
}

void require_square(const Mat& a, const char* op) {
  if (!a.square() || a.rows() == 0) {
    throw DimensionError(std::string(op) + ": expected a non-empty square matrix, got " +
                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
}

// Rotates the pair (x, y) in place: x' = c x - s y, y' = s x + c y.
void rotate_rows(std::span<double> x, std::span<double> y, double c, double s) {
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double xk = x[k];
    const double yk = y[k];
    x[k] = c * xk - s * yk;
    y[k] = s * xk + c * yk;
  }
}

}  // namespace

Mat Mat::identity(std::size_t n) {
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat Mat::diagonal(std::span<const double> diag) {
  Mat m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Mat Mat::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  Mat m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols()) throw DimensionError("from_rows: ragged rows");
    std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  }
  return m;
}

Vec Mat::column(std::size_t c) const {
  Vec out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

Mat Mat::transposed() const {
  Mat t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " times " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  Mat out(a.rows(), b.cols());
  // i-k-j order: each output row accumulates scaled rows of b.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out_row = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto b_row = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
    }
  }
  return out;
}

Vec matvec(const Mat& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw DimensionError("matvec: length mismatch");
  Vec y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
  return y;
}

Vec matvec_transposed(const Mat& a, std::span<const double> x) {
  if (a.rows() != x.size()) throw DimensionError("matvec_transposed: length mismatch");
  Vec y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto row = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] += row[j] * x[i];
  }
  return y;
}

Mat add(const Mat& a, const Mat& b) {
  require_same_shape(a, b, "add");
  Mat out = a;
  auto d = out.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += bd[i];
  return out;
}

Mat subtract(const Mat& a, const Mat& b) {
  require_same_shape(a, b, "subtract");
  Mat out = a;
  auto d = out.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] -= bd[i];
  return out;
}

Mat scaled(const Mat& a, double factor) {
  Mat out = a;
  for (double& v : out.data()) v *= factor;
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("dot: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double max_abs_diff(const Mat& a, const Mat& b) {
  require_same_shape(a, b, "max_abs_diff");
  return max_abs_diff(a.data(), b.data());
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("max_abs_diff: length mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double orthogonality_deviation(const Mat& w) {
  return max_abs_diff(matmul(w.transposed(), w), Mat::identity(w.cols()));
}

double row_orthogonality_deviation(const Mat& w) {
  return max_abs_diff(matmul(w, w.transposed()), Mat::identity(w.rows()));
}

double determinant(const Mat& a) {
  require_square(a, "determinant");
  Mat m = a;
  const std::size_t n = m.rows();
  double det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(m(r, col)) > std::abs(m(pivot, col))) pivot = r;
    if (m(pivot, col) == 0.0) return 0.0;
    if (pivot != col) {
      std::swap_ranges(m.row(pivot).begin(), m.row(pivot).end(), m.row(col).begin());
      det = -det;
    }
    det *= m(col, col);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = m(r, col) / m(col, col);
      for (std::size_t c = col; c < n; ++c) m(r, c) -= f * m(col, c);
    }
  }
  return det;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

QrResult qr(const Mat& a) {
  require_square(a, "qr");
  const std::size_t n = a.rows();
  // Work on columns stored as rows of the transpose.
  Mat qt = a.transposed();
  Mat r(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    auto v = qt.row(j);
    const double original_norm = norm2(v);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < j; ++i) {
        auto qi = qt.row(i);
        const double c = dot(qi, v);
        r(i, j) += c;
        for (std::size_t k = 0; k < n; ++k) v[k] -= c * qi[k];
      }
    }
    const double pivot = norm2(v);
    if (original_norm == 0.0 || pivot < 1e-12 * original_norm) {
      throw DomainError("qr: rank-deficient input (column " + std::to_string(j) +
                        ", pivot " + std::to_string(pivot) + ")");
    }
    r(j, j) = pivot;
    for (double& x : v) x /= pivot;
  }
  return {qt.transposed(), std::move(r)};
}

SvdResult svd(const Mat& a, int max_sweeps) {
  require_square(a, "svd");
  const std::size_t n = a.rows();
  Mat bt = a.transposed();  // row j = column j of A, rotated towards U * diag(s)
  Mat vt = Mat::identity(n);  // row j = column j of V

  constexpr double kTol = 1e-12;
  double frob2 = 0.0;
  for (double x : a.data()) frob2 += x * x;
  // columns this small are rounding residue of a rank-deficient input
  const double negligible = 1e-30 * frob2;
  bool converged = false;
  int sweep = 0;
  for (; sweep < max_sweeps && !converged; ++sweep) {
    converged = true;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        auto bp = bt.row(p);
        auto bq = bt.row(q);
        const double alpha = dot(bp, bp);
        const double beta = dot(bq, bq);
        const double gamma = dot(bp, bq);
        if (alpha <= negligible || beta <= negligible) continue;
        if (std::abs(gamma) <= kTol * std::sqrt(alpha * beta)) continue;
        converged = false;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        rotate_rows(bp, bq, c, s);
        rotate_rows(vt.row(p), vt.row(q), c, s);
      }
    }
  }
  if (!converged) throw ConvergenceError("svd: one-sided Jacobi did not converge", sweep);

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) sigma[j] = norm2(bt.row(j));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return sigma[i] > sigma[j]; });

  const double s_max = sigma[order.front()];
  const double zero_cut = s_max * static_cast<double>(n) * 1e-15;
  SvdResult out{Mat(n, n), Vec(n), Mat(n, n)};
  Mat ut(n, n);  // rows = columns of U
  std::vector<std::size_t> to_complete;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    out.s[k] = sigma[j];
    auto vrow = vt.row(j);
    for (std::size_t i = 0; i < n; ++i) out.v(i, k) = vrow[i];
    if (sigma[j] <= zero_cut || sigma[j] == 0.0) {
      to_complete.push_back(k);
      continue;
    }
    auto src = bt.row(j);
    auto dst = ut.row(k);
    for (std::size_t i = 0; i < n; ++i) dst[i] = src[i] / sigma[j];
  }
  // Null-space columns of U: Gram-Schmidt over the standard basis.
  std::vector<bool> filled(n, true);
  for (std::size_t k : to_complete) filled[k] = false;
  std::size_t candidate = 0;
  for (std::size_t k : to_complete) {
    for (; candidate < n; ++candidate) {
      Vec e(n, 0.0);
      e[candidate] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < n; ++i) {
          if (!filled[i]) continue;
          auto ui = ut.row(i);
          const double c = dot(ui, e);
          for (std::size_t m = 0; m < n; ++m) e[m] -= c * ui[m];
        }
      }
      const double len = norm2(e);
      if (len > 1e-6) {
        auto dst = ut.row(k);
        for (std::size_t m = 0; m < n; ++m) dst[m] = e[m] / len;
        filled[k] = true;
        ++candidate;
        break;
      }
    }
  }
  out.u = ut.transposed();
  return out;
}

EighResult eigh(const Mat& a, int max_sweeps) {
  require_square(a, "eigh");
  const std::size_t n = a.rows();
  double scale = 0.0;
  for (double x : a.data()) scale = std::max(scale, std::abs(x));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(a(i, j) - a(j, i)) > 1e-10 * std::max(1.0, scale)) {
        throw DomainError("eigh: matrix is not symmetric at (" + std::to_string(i) + "," +
                          std::to_string(j) + ")");
      }

  Mat m = a;
  Mat vt = Mat::identity(n);  // row k = eigenvector k
  double frob2 = 0.0;
  for (double x : m.data()) frob2 += x * x;
  const double off_target = 1e-30 * std::max(frob2, 1e-300);

  int sweep = 0;
  for (;; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += 2.0 * m(i, j) * m(i, j);
    if (off <= off_target) break;
    if (sweep >= max_sweeps) throw ConvergenceError("eigh: cyclic Jacobi did not converge", sweep);

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = m(p, q);
        if (apq == 0.0) continue;
        const double app = m(p, p);
        const double aqq = m(q, q);
        if (std::abs(apq) < 1e-18 * (std::abs(app) + std::abs(aqq))) {
          m(p, q) = m(q, p) = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        const double t =
            std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // Rows p, q then columns p, q (symmetric copy), then the 2x2 block.
        auto rp = m.row(p);
        auto rq = m.row(q);
        rotate_rows(rp, rq, c, s);
        for (std::size_t k = 0; k < n; ++k) {
          m(k, p) = rp[k];
          m(k, q) = rq[k];
        }
        m(p, p) = app - t * apq;
        m(q, q) = aqq + t * apq;
        m(p, q) = m(q, p) = 0.0;
        rotate_rows(vt.row(p), vt.row(q), c, s);
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return m(i, i) > m(j, j); });
  EighResult out{Vec(n), Mat(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = m(order[k], order[k]);
    auto v = vt.row(order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v[i];
  }
  return out;
}

}  // namespace pyramidnet
