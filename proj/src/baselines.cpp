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

#include "pyramidnet/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pyramidnet {

Mat svb_bound(const Mat& w, const SVBConfig& cfg) {
  if (!(cfg.epsilon >= 0.0) || !std::isfinite(cfg.epsilon)) {
    throw DomainError("svb: epsilon must be finite and >= 0");
  }
  if (w.rows() > w.cols()) throw DimensionError("svb: expected rows <= cols");
  const std::size_t m = w.rows();
  const std::size_t n = w.cols();
  Mat padded(n, n);
  std::copy(w.data().begin(), w.data().end(), padded.data().begin());

  auto [u, s, v] = svd(padded);
  const double lo = 1.0 / (1.0 + cfg.epsilon);
  const double hi = 1.0 + cfg.epsilon;
  // The first m singular values belong to w; the padding contributes zeros.
  Mat out(m, n);
  for (std::size_t k = 0; k < m; ++k) {
    const double sk = std::clamp(s[k], lo, hi);
    for (std::size_t i = 0; i < m; ++i) {
      const double uik = u(i, k) * sk;
      if (uik == 0.0) continue;
      auto row = out.row(i);
      for (std::size_t j = 0; j < n; ++j) row[j] += uik * v(j, k);
    }
  }
  return out;
}

Mat svb_update(const Mat& w, const Mat& g, double lr, const SVBConfig& cfg) {
  return svb_bound(subtract(w, scaled(g, lr)), cfg);
}

Mat stiefel_projection(const Mat& w, const Mat& g) {
  if (!w.square() || w.rows() != g.rows() || w.cols() != g.cols()) {
    throw DimensionError("stiefel_projection: w and g must be the same square shape");
  }
  const std::size_t n = w.rows();
  const Mat wt = w.transposed();
  const Mat left = matmul(subtract(Mat::identity(n), matmul(w, wt)), g);
  const Mat skew = subtract(matmul(wt, g), matmul(g.transposed(), w));
  return add(left, scaled(matmul(w, skew), 0.5));
}

Mat stiefel_update(const Mat& w, const Mat& g, double lr) {
  const Mat omega = stiefel_projection(w, g);
  return qr(subtract(w, scaled(omega, lr))).q;
}

}  // namespace pyramidnet
