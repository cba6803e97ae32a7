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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pyramidnet/error.hpp"
#include "pyramidnet/linalg.hpp"

namespace pyramidnet::data {

enum class DataErrorKind { kIo, kBadMagic, kTruncated, kCountMismatch, kEmpty, kZeroNorm, kRange };

class DataError : public Error {
 public:
  DataError(DataErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
  DataErrorKind kind() const { return kind_; }

 private:
  DataErrorKind kind_;
};

struct Dataset {
  Mat features;  // samples x dims
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  std::size_t dims() const { return features.cols(); }
  int num_classes() const;
};

/// Reads an IDX image file (magic 2051) and label file (magic 2049).
/// Pixels are scaled to [0, 1].
Dataset parse_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path);

/// Keeps rows whose label is in `classes`; labels become the rank of the
/// original label within `classes` (ascending).
Dataset filter_classes(const Dataset& ds, const std::set<int>& classes);

/// First `n` rows (all rows when n exceeds the size).
Dataset head(const Dataset& ds, std::size_t n);

struct PCAModel {
  Vec mean;
  Mat components;  // k x dims, orthonormal rows
  Vec variances;   // eigenvalues of the covariance for each component
};

/// Top-k principal components of the mean-centred covariance (1/(N-1)).
/// The largest-magnitude entry of each component is made positive.
PCAModel pca_fit(const Dataset& ds, std::size_t k);
Dataset pca_transform(const PCAModel& model, const Dataset& ds);
/// Maps k-dimensional scores back to the original space.
Mat pca_reconstruct(const PCAModel& model, const Mat& scores);

/// Divides each row by its L2 norm. Zero rows raise kZeroNorm naming the row.
Dataset normalize_rows(const Dataset& ds);

/// Two Gaussian blobs (unit variance) centred at -/+ separation/2 on the first
/// axis; label 0 then label 1, interleaved.
Dataset synth_blobs(std::size_t n_per_class, std::size_t dims, double separation, std::uint64_t seed);

/// Directory of the IDX files: explicit value, else $PYRAMIDNET_DATA_DIR,
/// else ./data/mnist.
std::filesystem::path resolve_data_dir(const std::optional<std::string>& explicit_dir);
bool mnist_available(const std::filesystem::path& dir);

struct PreparedData {
  Dataset train;
  Dataset test;
  std::optional<PCAModel> pca;
};

struct MnistOptions {
  std::set<int> classes;       // empty = all ten
  std::size_t train_size = 5000;
  std::size_t test_size = 1000;
  std::size_t pca_k = 0;       // 0 = keep pixels
};

/// parse -> filter -> first N -> PCA (fit on train) -> normalize.
PreparedData prepare_mnist(const std::filesystem::path& dir, const MnistOptions& options);

/// Blobs split into train and test with independent seeds, rows normalised.
PreparedData prepare_synthetic(std::size_t train_size, std::size_t test_size, std::size_t dims,
                               double separation, std::uint64_t seed);

}  // namespace pyramidnet::data
