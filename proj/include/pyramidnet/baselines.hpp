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

#include "pyramidnet/linalg.hpp"

namespace pyramidnet {

struct SVBConfig {
  /// Singular values are clamped into [1/(1+epsilon), 1+epsilon].
  double epsilon = 0.0;
};

/// Clamps the singular values of `w` into the SVB band. Rectangular inputs
/// (fewer rows than columns) are padded with zero rows for the square SVD and
/// only their own singular values are bounded.
Mat svb_bound(const Mat& w, const SVBConfig& cfg);

/// Gradient step followed by singular value bounding.
Mat svb_update(const Mat& w, const Mat& g, double lr, const SVBConfig& cfg);

/// Tangent-space projection (I - W W^T) G + 1/2 W (W^T G - G^T W).
Mat stiefel_projection(const Mat& w, const Mat& g);

/// W' = W - lr * Omega, retracted onto the orthogonal group by taking the Q
/// factor of its QR decomposition. Square matrices only.
Mat stiefel_update(const Mat& w, const Mat& g, double lr);

}  // namespace pyramidnet
