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

#include "pyramidnet/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace pyramidnet {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::distance(v.begin(), std::max_element(v.begin(), v.end())));
}

void check_datasets(const data::Dataset& train_set, const data::Dataset& test_set, int input_size) {
  if (train_set.size() == 0) throw DomainError("train: empty training set");
  if (test_set.size() == 0) throw DomainError("train: empty test set");
  if (train_set.dims() != static_cast<std::size_t>(input_size) ||
      test_set.dims() != static_cast<std::size_t>(input_size)) {
    throw DimensionError("train: dataset width " + std::to_string(train_set.dims()) +
                         " does not match network input " + std::to_string(input_size));
  }
}

// Shared epoch/minibatch driver. `step` consumes one batch of sample indices
// and returns its mean loss; `evaluate` returns test accuracy.
template <typename Step, typename Evaluate>
MetricsTable run_loop(std::size_t n_samples, const TrainConfig& cfg, Step&& step, Evaluate&& evaluate) {
  cfg.validate();
  MetricsTable table;
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(n_samples);
  std::iota(order.begin(), order.end(), 0);
  const auto start = Clock::now();
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  const std::size_t batches = (n_samples + batch - 1) / batch;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.shuffle) std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t first = b * batch;
      const std::size_t last = std::min(first + batch, n_samples);
      MetricsRow row;
      row.epoch = epoch;
      row.minibatch = static_cast<int>(b + 1);
      row.train_loss = step(std::span<const std::size_t>(order.data() + first, last - first));
      const bool epoch_end = b + 1 == batches;
      const bool interval = cfg.eval_interval > 0 && (b + 1) % static_cast<std::size_t>(cfg.eval_interval) == 0;
      if (epoch_end || interval) row.test_accuracy = evaluate();
      row.wall_ms = elapsed_ms(start);
      table.rows().push_back(row);
    }
  }
  return table;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw DomainError("TrainConfig: learning_rate must be finite and >= 0");
  }
  if (epochs < 1) throw DomainError("TrainConfig: epochs must be >= 1");
  if (batch_size < 1) throw DomainError("TrainConfig: batch_size must be >= 1");
  if (eval_interval < 0) throw DomainError("TrainConfig: eval_interval must be >= 0");
}

std::optional<double> MetricsTable::final_accuracy() const {
  for (auto it = rows_.rbegin(); it != rows_.rend(); ++it)
    if (it->test_accuracy) return it->test_accuracy;
  return std::nullopt;
}

std::vector<double> MetricsTable::epoch_accuracies() const {
  std::vector<double> out;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const bool last_of_epoch = i + 1 == rows_.size() || rows_[i + 1].epoch != rows_[i].epoch;
    if (last_of_epoch && rows_[i].test_accuracy) out.push_back(*rows_[i].test_accuracy);
  }
  return out;
}

std::string MetricsTable::to_csv() const {
  std::ostringstream out;
  out.precision(10);
  out << kHeader << '\n';
  for (const auto& r : rows_) {
    out << r.epoch << ',' << r.minibatch << ',' << r.train_loss << ',';
    if (r.test_accuracy) out << *r.test_accuracy;
    out << ',' << r.wall_ms << '\n';
  }
  return out.str();
}

void MetricsTable::write_csv(const std::filesystem::path& path) const {
  std::ofstream f(path);
  if (!f) throw Error("cannot write metrics to " + path.string());
  f << to_csv();
}

bool MetricsTable::same_values(const MetricsTable& other) const {
  if (rows_.size() != other.rows_.size()) return false;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& a = rows_[i];
    const auto& b = other.rows_[i];
    if (a.epoch != b.epoch || a.minibatch != b.minibatch || a.train_loss != b.train_loss ||
        a.test_accuracy != b.test_accuracy)
      return false;
  }
  return true;
}

double accuracy(const Network& net, const data::Dataset& ds) {
  if (ds.size() == 0) return 0.0;
  std::size_t correct = 0;
  for (std::size_t s = 0; s < ds.size(); ++s) {
    const Vec out = network_predict(net, ds.features.row(s));
    if (static_cast<int>(argmax(out)) == ds.labels[s]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(ds.size());
}

MetricsTable train(Network& net, const data::Dataset& train_set, const data::Dataset& test_set,
                   const TrainConfig& cfg, const std::function<void(const Network&)>& on_step) {
  check_datasets(train_set, test_set, net.input_size());
  auto step = [&](std::span<const std::size_t> batch) {
    auto grads = NetworkGradients::zeros_like(net);
    for (std::size_t s : batch) {
      const auto pass = network_forward(net, train_set.features.row(s));
      grads.accumulate(network_backward(net, pass, train_set.labels[s]));
    }
    grads.scale(1.0 / static_cast<double>(batch.size()));
    sgd_step(net, grads, cfg.learning_rate);
    if (on_step) on_step(net);
    return grads.loss;
  };
  return run_loop(train_set.size(), cfg, step, [&] { return accuracy(net, test_set); });
}

std::string_view to_string(Updater u) {
  switch (u) {
    case Updater::kPlain: return "plain";
    case Updater::kSvb: return "svb";
    case Updater::kStiefel: return "stiefel";
  }
  return "?";
}

Updater parse_updater(std::string_view name) {
  if (name == "plain") return Updater::kPlain;
  if (name == "svb") return Updater::kSvb;
  if (name == "stiefel") return Updater::kStiefel;
  throw DomainError("unknown updater '" + std::string(name) + "'");
}

DenseNetwork DenseNetwork::random_orthogonal(std::span<const int> architecture, const Network::Options& options,
                                             std::mt19937_64& rng) {
  if (architecture.size() < 2) throw DimensionError("DenseNetwork: need at least two sizes");
  DenseNetwork net;
  net.loss = options.loss;
  for (std::size_t l = 0; l + 1 < architecture.size(); ++l) {
    DenseLayer layer;
    layer.weights = matrix_from_angles(PyramidLayer::random(architecture[l], architecture[l + 1], rng));
    if (options.bias) layer.bias = Vec(architecture[l + 1], 0.0);
    layer.activation = (l + 2 == architecture.size()) ? options.output_activation : options.hidden_activation;
    net.layers.push_back(std::move(layer));
  }
  return net;
}

Vec DenseNetwork::predict(std::span<const double> x) const {
  Vec a(x.begin(), x.end());
  for (const auto& layer : layers) {
    Vec z = matvec(layer.weights, a);
    if (layer.bias)
      for (std::size_t j = 0; j < z.size(); ++j) z[j] += (*layer.bias)[j];
    for (double& v : z) v = activate(layer.activation, v);
    a = std::move(z);
  }
  return a;
}

double accuracy(const DenseNetwork& net, const data::Dataset& ds) {
  if (ds.size() == 0) return 0.0;
  std::size_t correct = 0;
  for (std::size_t s = 0; s < ds.size(); ++s)
    if (static_cast<int>(argmax(net.predict(ds.features.row(s)))) == ds.labels[s]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(ds.size());
}

MetricsTable train_dense(DenseNetwork& net, Updater updater, const data::Dataset& train_set,
                         const data::Dataset& test_set, const TrainConfig& cfg, const SVBConfig& svb,
                         const std::function<void(const DenseNetwork&)>& on_step) {
  if (net.layers.empty()) throw DimensionError("train_dense: empty network");
  check_datasets(train_set, test_set, static_cast<int>(net.layers.front().weights.cols()));
  if (updater == Updater::kStiefel) {
    for (const auto& layer : net.layers)
      if (!layer.weights.square()) throw DimensionError("train_dense: the Stiefel updater needs square layers");
  }
  const std::size_t n_layers = net.layers.size();

  auto step = [&](std::span<const std::size_t> batch) {
    std::vector<Mat> grad_w;
    std::vector<Vec> grad_b;
    for (const auto& layer : net.layers) {
      grad_w.emplace_back(layer.weights.rows(), layer.weights.cols());
      grad_b.emplace_back(layer.weights.rows(), 0.0);
    }
    double loss_sum = 0.0;
    std::vector<Vec> acts(n_layers + 1);
    std::vector<Vec> pre(n_layers);
    for (std::size_t s : batch) {
      auto x = train_set.features.row(s);
      acts[0].assign(x.begin(), x.end());
      for (std::size_t l = 0; l < n_layers; ++l) {
        const auto& layer = net.layers[l];
        pre[l] = matvec(layer.weights, acts[l]);
        if (layer.bias)
          for (std::size_t j = 0; j < pre[l].size(); ++j) pre[l][j] += (*layer.bias)[j];
        acts[l + 1].resize(pre[l].size());
        for (std::size_t j = 0; j < pre[l].size(); ++j) acts[l + 1][j] = activate(layer.activation, pre[l][j]);
      }
      auto [loss, delta_a] = loss_and_delta(net.loss, acts[n_layers], train_set.labels[s]);
      loss_sum += loss;
      for (std::size_t l = n_layers; l-- > 0;) {
        const auto& layer = net.layers[l];
        Vec delta(pre[l].size());
        for (std::size_t j = 0; j < delta.size(); ++j)
          delta[j] = delta_a[j] * activation_derivative(layer.activation, pre[l][j]);
        for (std::size_t j = 0; j < delta.size(); ++j) {
          grad_b[l][j] += delta[j];
          auto row = grad_w[l].row(j);
          for (std::size_t k = 0; k < row.size(); ++k) row[k] += delta[j] * acts[l][k];
        }
        delta_a = matvec_transposed(layer.weights, delta);
      }
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (std::size_t l = 0; l < n_layers; ++l) {
      auto& layer = net.layers[l];
      const Mat g = scaled(grad_w[l], inv);
      switch (updater) {
        case Updater::kPlain:
          layer.weights = subtract(layer.weights, scaled(g, cfg.learning_rate));
          break;
        case Updater::kSvb:
          layer.weights = svb_update(layer.weights, g, cfg.learning_rate, svb);
          break;
        case Updater::kStiefel:
          layer.weights = stiefel_update(layer.weights, g, cfg.learning_rate);
          break;
      }
      if (layer.bias)
        for (std::size_t j = 0; j < layer.bias->size(); ++j) (*layer.bias)[j] -= cfg.learning_rate * grad_b[l][j] * inv;
    }
    if (on_step) on_step(net);
    return loss_sum * inv;
  };
  return run_loop(train_set.size(), cfg, step, [&] { return accuracy(net, test_set); });
}

DenseTrainResult dense_train_baseline(std::span<const int> architecture, Updater updater,
                                      const data::Dataset& train_set, const data::Dataset& test_set,
                                      const TrainConfig& cfg, const DenseOptions& options,
                                      const std::function<void(const DenseNetwork&)>& on_step) {
  std::mt19937_64 rng(cfg.seed);
  DenseTrainResult result{DenseNetwork::random_orthogonal(architecture, options.network, rng), {}};
  result.metrics = train_dense(result.network, updater, train_set, test_set, cfg, options.svb, on_step);
  return result;
}

}  // namespace pyramidnet
