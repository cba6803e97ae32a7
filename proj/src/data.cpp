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

#include "pyramidnet/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <map>
#include <random>

namespace pyramidnet::data {

namespace {

constexpr std::uint32_t kImagesMagic = 2051;
constexpr std::uint32_t kLabelsMagic = 2049;

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError(DataErrorKind::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t offset,
                        const std::filesystem::path& path) {
  if (offset + 4 > bytes.size()) {
    throw DataError(DataErrorKind::kTruncated, path.string() + ": header truncated");
  }
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

}  // namespace

int Dataset::num_classes() const {
  if (labels.empty()) return 0;
  return *std::max_element(labels.begin(), labels.end()) + 1;
}

Dataset parse_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path) {
  const auto images = read_file(images_path);
  const auto labels = read_file(labels_path);

  const std::uint32_t image_magic = read_be32(images, 0, images_path);
  if (image_magic != kImagesMagic) {
    throw DataError(DataErrorKind::kBadMagic, images_path.string() + ": magic " +
                                                  std::to_string(image_magic) + ", expected 2051");
  }
  const std::uint32_t label_magic = read_be32(labels, 0, labels_path);
  if (label_magic != kLabelsMagic) {
    throw DataError(DataErrorKind::kBadMagic, labels_path.string() + ": magic " +
                                                  std::to_string(label_magic) + ", expected 2049");
  }

  const std::size_t count = read_be32(images, 4, images_path);
  const std::size_t rows = read_be32(images, 8, images_path);
  const std::size_t cols = read_be32(images, 12, images_path);
  const std::size_t label_count = read_be32(labels, 4, labels_path);
  if (count != label_count) {
    throw DataError(DataErrorKind::kCountMismatch, "image count " + std::to_string(count) +
                                                       " != label count " + std::to_string(label_count));
  }
  const std::size_t pixels = rows * cols;
  if (images.size() < 16 + count * pixels) {
    throw DataError(DataErrorKind::kTruncated, images_path.string() + ": pixel payload truncated (" +
                                                   std::to_string(images.size() - 16) + " of " +
                                                   std::to_string(count * pixels) + " bytes)");
  }
  if (labels.size() < 8 + count) {
    throw DataError(DataErrorKind::kTruncated, labels_path.string() + ": label payload truncated");
  }

  Dataset ds{Mat(count, pixels), std::vector<int>(count)};
  for (std::size_t s = 0; s < count; ++s) {
    auto row = ds.features.row(s);
    for (std::size_t p = 0; p < pixels; ++p) row[p] = images[16 + s * pixels + p] / 255.0;
    ds.labels[s] = labels[8 + s];
  }
  return ds;
}

Dataset filter_classes(const Dataset& ds, const std::set<int>& classes) {
  std::map<int, int> remap;
  int next = 0;
  for (int c : classes) remap[c] = next++;
  std::vector<std::size_t> keep;
  for (std::size_t s = 0; s < ds.size(); ++s)
    if (remap.contains(ds.labels[s])) keep.push_back(s);
  if (keep.empty()) throw DataError(DataErrorKind::kEmpty, "filter_classes: no samples left");

  Dataset out{Mat(keep.size(), ds.dims()), std::vector<int>(keep.size())};
  for (std::size_t r = 0; r < keep.size(); ++r) {
    std::copy_n(ds.features.row(keep[r]).begin(), ds.dims(), out.features.row(r).begin());
    out.labels[r] = remap[ds.labels[keep[r]]];
  }
  return out;
}

Dataset head(const Dataset& ds, std::size_t n) {
  n = std::min(n, ds.size());
  Dataset out{Mat(n, ds.dims()), std::vector<int>(ds.labels.begin(), ds.labels.begin() + n)};
  std::copy_n(ds.features.data().begin(), n * ds.dims(), out.features.data().begin());
  return out;
}

PCAModel pca_fit(const Dataset& ds, std::size_t k) {
  const std::size_t n = ds.size();
  const std::size_t d = ds.dims();
  if (k == 0 || k > d || k > n) {
    throw DataError(DataErrorKind::kRange, "pca_fit: k=" + std::to_string(k) + " outside [1, min(dims=" +
                                               std::to_string(d) + ", samples=" + std::to_string(n) + ")]");
  }
  PCAModel model;
  model.mean.assign(d, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    auto row = ds.features.row(s);
    for (std::size_t j = 0; j < d; ++j) model.mean[j] += row[j];
  }
  for (double& m : model.mean) m /= static_cast<double>(n);

  Mat cov(d, d);
  Vec centred(d);
  for (std::size_t s = 0; s < n; ++s) {
    auto row = ds.features.row(s);
    for (std::size_t j = 0; j < d; ++j) centred[j] = row[j] - model.mean[j];
    for (std::size_t i = 0; i < d; ++i) {
      if (centred[i] == 0.0) continue;
      auto cov_row = cov.row(i);
      for (std::size_t j = i; j < d; ++j) cov_row[j] += centred[i] * centred[j];
    }
  }
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) {
      cov(i, j) /= denom;
      cov(j, i) = cov(i, j);
    }

  const auto eig = eigh(cov);
  model.components = Mat(k, d);
  model.variances.assign(eig.values.begin(), eig.values.begin() + k);
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t arg = 0;
    for (std::size_t j = 0; j < d; ++j)
      if (std::abs(eig.vectors(j, c)) > std::abs(eig.vectors(arg, c))) arg = j;
    const double sign = eig.vectors(arg, c) < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < d; ++j) model.components(c, j) = sign * eig.vectors(j, c);
  }
  return model;
}

Dataset pca_transform(const PCAModel& model, const Dataset& ds) {
  if (ds.dims() != model.mean.size()) {
    throw DataError(DataErrorKind::kRange, "pca_transform: dataset has " + std::to_string(ds.dims()) +
                                               " dims, model expects " + std::to_string(model.mean.size()));
  }
  const std::size_t k = model.components.rows();
  Dataset out{Mat(ds.size(), k), ds.labels};
  Vec centred(ds.dims());
  for (std::size_t s = 0; s < ds.size(); ++s) {
    auto row = ds.features.row(s);
    for (std::size_t j = 0; j < ds.dims(); ++j) centred[j] = row[j] - model.mean[j];
    for (std::size_t c = 0; c < k; ++c) out.features(s, c) = dot(model.components.row(c), centred);
  }
  return out;
}

Mat pca_reconstruct(const PCAModel& model, const Mat& scores) {
  Mat out = matmul(scores, model.components);
  for (std::size_t s = 0; s < out.rows(); ++s)
    for (std::size_t j = 0; j < out.cols(); ++j) out(s, j) += model.mean[j];
  return out;
}

Dataset normalize_rows(const Dataset& ds) {
  Dataset out = ds;
  for (std::size_t s = 0; s < out.size(); ++s) {
    auto row = out.features.row(s);
    const double n = norm2(row);
    if (n == 0.0) {
      throw DataError(DataErrorKind::kZeroNorm, "normalize_rows: row " + std::to_string(s) + " has zero norm");
    }
    for (double& v : row) v /= n;
  }
  return out;
}

Dataset synth_blobs(std::size_t n_per_class, std::size_t dims, double separation, std::uint64_t seed) {
  if (n_per_class == 0) throw DataError(DataErrorKind::kEmpty, "synth_blobs: n_per_class must be > 0");
  if (dims == 0) throw DataError(DataErrorKind::kRange, "synth_blobs: dims must be > 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Dataset ds{Mat(2 * n_per_class, dims), std::vector<int>(2 * n_per_class)};
  for (std::size_t s = 0; s < 2 * n_per_class; ++s) {
    const int label = static_cast<int>(s % 2);
    ds.labels[s] = label;
    auto row = ds.features.row(s);
    for (double& v : row) v = noise(rng);
    row[0] += (label == 0 ? -0.5 : 0.5) * separation;
  }
  return ds;
}

std::filesystem::path resolve_data_dir(const std::optional<std::string>& explicit_dir) {
  if (explicit_dir && !explicit_dir->empty()) return *explicit_dir;
  if (const char* env = std::getenv("PYRAMIDNET_DATA_DIR"); env && *env) return env;
  return "data/mnist";
}

bool mnist_available(const std::filesystem::path& dir) {
  for (const char* name : {"train-images-idx3-ubyte", "train-labels-idx1-ubyte", "t10k-images-idx3-ubyte",
                           "t10k-labels-idx1-ubyte"})
    if (!std::filesystem::exists(dir / name)) return false;
  return true;
}

PreparedData prepare_mnist(const std::filesystem::path& dir, const MnistOptions& options) {
  if (!mnist_available(dir)) {
    throw DataError(DataErrorKind::kIo, "MNIST IDX files not found in " + dir.string());
  }
  Dataset train = parse_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte");
  Dataset test = parse_idx(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte");
  if (!options.classes.empty()) {
    train = filter_classes(train, options.classes);
    test = filter_classes(test, options.classes);
  }
  train = head(train, options.train_size);
  test = head(test, options.test_size);

  PreparedData out;
  if (options.pca_k > 0) {
    out.pca = pca_fit(train, options.pca_k);
    train = pca_transform(*out.pca, train);
    test = pca_transform(*out.pca, test);
  }
  out.train = normalize_rows(train);
  out.test = normalize_rows(test);
  return out;
}

PreparedData prepare_synthetic(std::size_t train_size, std::size_t test_size, std::size_t dims,
                               double separation, std::uint64_t seed) {
  PreparedData out;
  out.train = normalize_rows(synth_blobs((train_size + 1) / 2, dims, separation, seed));
  out.test = normalize_rows(synth_blobs((test_size + 1) / 2, dims, separation, seed ^ 0x9e3779b97f4a7c15ULL));
  return out;
}

}  // namespace pyramidnet::data
