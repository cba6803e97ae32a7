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
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pyramidnet/baselines.hpp"
#include "pyramidnet/data.hpp"
#include "pyramidnet/network.hpp"

namespace pyramidnet {

struct TrainConfig {
  double learning_rate = 0.1;
  int epochs = 10;
  int batch_size = 50;
  std::uint64_t seed = 1;
  bool shuffle = true;
  /// Also evaluate test accuracy every `eval_interval` minibatches (0: only at
  /// the end of each epoch).
  int eval_interval = 0;

  void validate() const;
};

struct MetricsRow {
  int epoch = 0;       // 1-based
  int minibatch = 0;   // 1-based, within the epoch
  double train_loss = 0.0;
  std::optional<double> test_accuracy;
  double wall_ms = 0.0;  // since the start of training
};

class MetricsTable {
 public:
  static constexpr std::string_view kHeader = "epoch,minibatch,train_loss,test_accuracy,wall_ms";

  std::vector<MetricsRow>& rows() { return rows_; }
  const std::vector<MetricsRow>& rows() const { return rows_; }

  /// Accuracy of the last evaluated row.
  std::optional<double> final_accuracy() const;
  /// Test accuracy at the end of each epoch.
  std::vector<double> epoch_accuracies() const;

  std::string to_csv() const;
  void write_csv(const std::filesystem::path& path) const;

  /// Row-by-row equality ignoring wall_ms.
  bool same_values(const MetricsTable& other) const;

 private:
  std::vector<MetricsRow> rows_;
};

/// Fraction of samples whose argmax output equals the label.
double accuracy(const Network& net, const data::Dataset& ds);

/// Minibatch SGD in angle space. Gradients are averaged over each batch, the
/// sample order is reshuffled per epoch from `cfg.seed`. `on_step` runs after
/// every update.
MetricsTable train(Network& net, const data::Dataset& train_set, const data::Dataset& test_set,
                   const TrainConfig& cfg, const std::function<void(const Network&)>& on_step = {});

// -- dense baselines --

enum class Updater { kPlain, kSvb, kStiefel };
std::string_view to_string(Updater u);
Updater parse_updater(std::string_view name);

struct DenseLayer {
  Mat weights;  // n_out x n_in
  std::optional<Vec> bias;
  Activation activation = Activation::kSigmoid;
};

struct DenseNetwork {
  std::vector<DenseLayer> layers;
  Loss loss = Loss::kSoftmaxCrossEntropy;

  /// Weights initialised to orthonormal rows (the matrix of a random pyramid).
  static DenseNetwork random_orthogonal(std::span<const int> architecture, const Network::Options& options,
                                        std::mt19937_64& rng);
  Vec predict(std::span<const double> x) const;
};

double accuracy(const DenseNetwork& net, const data::Dataset& ds);

struct DenseOptions {
  Network::Options network;
  SVBConfig svb;
};

struct DenseTrainResult {
  DenseNetwork network;
  MetricsTable metrics;
};

/// Same loop as `train` with explicit weight matrices; dC/dW_jk = Delta_j a_k.
/// The updater is applied to every layer after each minibatch.
MetricsTable train_dense(DenseNetwork& net, Updater updater, const data::Dataset& train_set,
                         const data::Dataset& test_set, const TrainConfig& cfg, const SVBConfig& svb = {},
                         const std::function<void(const DenseNetwork&)>& on_step = {});

DenseTrainResult dense_train_baseline(std::span<const int> architecture, Updater updater,
                                      const data::Dataset& train_set, const data::Dataset& test_set,
                                      const TrainConfig& cfg, const DenseOptions& options = {},
                                      const std::function<void(const DenseNetwork&)>& on_step = {});

}  // namespace pyramidnet
