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

#include "pyramidnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pyramidnet {

double activate(Activation a, double z) {
  switch (a) {
    case Activation::kSigmoid:
      return 1.0 / (1.0 + std::exp(-z));
    case Activation::kRelu:
      return z > 0.0 ? z : 0.0;
    case Activation::kIdentity:
      return z;
  }
  return z;
}

double activation_derivative(Activation a, double z) {
  switch (a) {
    case Activation::kSigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-z));
      return s * (1.0 - s);
    }
    case Activation::kRelu:
      return z > 0.0 ? 1.0 : 0.0;
    case Activation::kIdentity:
      return 1.0;
  }
  return 1.0;
}

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kRelu: return "relu";
    case Activation::kIdentity: return "identity";
  }
  return "?";
}

std::string_view to_string(Loss l) {
  return l == Loss::kMse ? "mse" : "softmax_ce";
}

Activation parse_activation(std::string_view name) {
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "relu") return Activation::kRelu;
  if (name == "identity" || name == "none") return Activation::kIdentity;
  throw DomainError("unknown activation '" + std::string(name) + "'");
}

Loss parse_loss(std::string_view name) {
  if (name == "softmax_ce" || name == "softmax-cross-entropy" || name == "ce") return Loss::kSoftmaxCrossEntropy;
  if (name == "mse") return Loss::kMse;
  throw DomainError("unknown loss '" + std::string(name) + "'");
}

Network::Network(std::vector<NetworkLayer> layers, Loss loss) : layers_(std::move(layers)), loss_(loss) {
  if (layers_.empty()) throw DimensionError("Network: no layers");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (l + 1 < layers_.size() && layer.pyramid.n_out() != layers_[l + 1].pyramid.n_in()) {
      throw DimensionError("Network: layer " + std::to_string(l) + " outputs " +
                           std::to_string(layer.pyramid.n_out()) + " but layer " +
                           std::to_string(l + 1) + " takes " +
                           std::to_string(layers_[l + 1].pyramid.n_in()));
    }
    if (layer.bias && layer.bias->size() != static_cast<std::size_t>(layer.pyramid.n_out())) {
      throw DimensionError("Network: bias length mismatch at layer " + std::to_string(l));
    }
  }
}

Network Network::random(std::span<const int> architecture, const Options& options,
                        std::mt19937_64& rng) {
  if (architecture.size() < 2) throw DimensionError("Network::random: need at least two sizes");
  std::vector<NetworkLayer> layers;
  for (std::size_t l = 0; l + 1 < architecture.size(); ++l) {
    NetworkLayer layer;
    layer.pyramid = PyramidLayer::random(architecture[l], architecture[l + 1], rng);
    if (options.bias) layer.bias = Vec(architecture[l + 1], 0.0);
    layer.activation = (l + 2 == architecture.size()) ? options.output_activation : options.hidden_activation;
    layers.push_back(std::move(layer));
  }
  return Network(std::move(layers), options.loss);
}

std::vector<int> Network::architecture() const {
  std::vector<int> arch{input_size()};
  for (const auto& layer : layers_) arch.push_back(layer.pyramid.n_out());
  return arch;
}

NetworkForward network_forward(const Network& net, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(net.input_size())) {
    throw DimensionError("network_forward: input length " + std::to_string(x.size()) +
                         ", network expects " + std::to_string(net.input_size()));
  }
  NetworkForward pass;
  Vec a(x.begin(), x.end());
  for (const auto& layer : net.layers()) {
    auto fwd = forward(layer.pyramid, a, /*keep_trace=*/true);
    Vec z = std::move(fwd.y);
    if (layer.bias)
      for (std::size_t j = 0; j < z.size(); ++j) z[j] += (*layer.bias)[j];
    a.resize(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) a[j] = activate(layer.activation, z[j]);
    pass.traces.push_back(std::move(*fwd.trace));
    pass.pre_activations.push_back(std::move(z));
    pass.post_activations.push_back(a);
  }
  pass.output = std::move(a);
  return pass;
}

Vec network_predict(const Network& net, std::span<const double> x) {
  Vec a(x.begin(), x.end());
  for (const auto& layer : net.layers()) {
    Vec z = forward(layer.pyramid, a).y;
    if (layer.bias)
      for (std::size_t j = 0; j < z.size(); ++j) z[j] += (*layer.bias)[j];
    for (double& v : z) v = activate(layer.activation, v);
    a = std::move(z);
  }
  return a;
}

LossDelta loss_and_delta(Loss loss, std::span<const double> output, const Target& target) {
  const std::size_t n = output.size();
  Vec t;
  if (const int* cls = std::get_if<int>(&target)) {
    if (*cls < 0 || static_cast<std::size_t>(*cls) >= n) {
      throw DomainError("loss_and_delta: class index " + std::to_string(*cls) + " out of range [0, " +
                        std::to_string(n) + ")");
    }
    t.assign(n, 0.0);
    t[*cls] = 1.0;
  } else {
    t = std::get<Vec>(target);
    if (t.size() != n) throw DimensionError("loss_and_delta: target length mismatch");
  }

  LossDelta out{0.0, Vec(n)};
  if (loss == Loss::kMse) {
    for (std::size_t j = 0; j < n; ++j) {
      out.delta[j] = output[j] - t[j];
      out.loss += 0.5 * out.delta[j] * out.delta[j];
    }
    return out;
  }
  const double m = *std::max_element(output.begin(), output.end());
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) sum += std::exp(output[j] - m);
  const double log_sum = m + std::log(sum);
  for (std::size_t j = 0; j < n; ++j) {
    const double p = std::exp(output[j] - log_sum);
    out.delta[j] = p - t[j];
    out.loss -= t[j] * (output[j] - log_sum);
  }
  return out;
}

LayerGradient layer_backward(const PyramidLayer& layer, const ForwardTrace& trace,
                             std::span<const double> delta_out, bool keep_trace) {
  const auto& schedule = layer.schedule();
  const int steps = schedule.timesteps();
  const auto n_in = static_cast<std::size_t>(layer.n_in());
  if (trace.inner_layers.size() != static_cast<std::size_t>(steps) + 1) {
    throw DimensionError("layer_backward: trace has " + std::to_string(trace.inner_layers.size()) +
                         " inner layers, layer needs " + std::to_string(steps + 1));
  }
  for (const Vec& zeta : trace.inner_layers)
    if (zeta.size() != n_in) throw DimensionError("layer_backward: inner layer width mismatch");
  if (delta_out.size() != static_cast<std::size_t>(layer.n_out())) {
    throw DimensionError("layer_backward: delta length " + std::to_string(delta_out.size()) +
                         ", layer outputs " + std::to_string(layer.n_out()));
  }

  LayerGradient out;
  out.angle_grads.assign(layer.size(), 0.0);
  Vec delta(n_in, 0.0);
  std::copy(delta_out.begin(), delta_out.end(), delta.begin());
  if (keep_trace) {
    out.trace.emplace();
    out.trace->inner_errors.assign(steps + 1, Vec{});
    out.trace->inner_errors[steps] = delta;
  }

  const auto slots = schedule.slots();
  for (int t = steps - 1; t >= 0; --t) {
    const Vec& zeta = trace.inner_layers[t];
    auto [first, last] = schedule.timestep_range(t);
    for (std::size_t k = first; k < last; ++k) {
      const int i = slots[k].wire;
      const double c = std::cos(layer.angle(k));
      const double s = std::sin(layer.angle(k));
      const double di = delta[i];
      const double dj = delta[i + 1];
      out.angle_grads[k] = di * (-s * zeta[i] + c * zeta[i + 1]) + dj * (-c * zeta[i] - s * zeta[i + 1]);
      // delta^t = (w^t)^T delta^{t+1}
      delta[i] = c * di - s * dj;
      delta[i + 1] = s * di + c * dj;
    }
    out.gate_visits += last - first;
    if (keep_trace) out.trace->inner_errors[t] = delta;
  }
  out.delta_in = std::move(delta);
  return out;
}

NetworkGradients NetworkGradients::zeros_like(const Network& net) {
  NetworkGradients g;
  for (const auto& layer : net.layers()) {
    g.angle_grads.emplace_back(layer.pyramid.size(), 0.0);
    g.bias_grads.emplace_back(layer.bias ? layer.bias->size() : 0, 0.0);
  }
  return g;
}

void NetworkGradients::accumulate(const NetworkGradients& other) {
  if (other.angle_grads.size() != angle_grads.size()) throw DimensionError("accumulate: layer count mismatch");
  for (std::size_t l = 0; l < angle_grads.size(); ++l) {
    for (std::size_t k = 0; k < angle_grads[l].size(); ++k) angle_grads[l][k] += other.angle_grads[l][k];
    for (std::size_t k = 0; k < bias_grads[l].size(); ++k) bias_grads[l][k] += other.bias_grads[l][k];
  }
  loss += other.loss;
}

void NetworkGradients::scale(double factor) {
  for (auto& g : angle_grads)
    for (double& v : g) v *= factor;
  for (auto& g : bias_grads)
    for (double& v : g) v *= factor;
  loss *= factor;
}

NetworkGradients network_backward(const Network& net, const NetworkForward& pass,
                                  const Target& target) {
  const auto layers = net.layers();
  if (pass.traces.size() != layers.size()) throw DimensionError("network_backward: pass/network mismatch");
  NetworkGradients grads;
  grads.angle_grads.resize(layers.size());
  grads.bias_grads.resize(layers.size());

  auto [loss, delta_a] = loss_and_delta(net.loss(), pass.output, target);
  grads.loss = loss;
  for (std::size_t l = layers.size(); l-- > 0;) {
    const auto& layer = layers[l];
    const Vec& z = pass.pre_activations[l];
    Vec delta(z.size());
    for (std::size_t j = 0; j < z.size(); ++j)
      delta[j] = delta_a[j] * activation_derivative(layer.activation, z[j]);
    if (layer.bias) grads.bias_grads[l] = delta;
    auto lg = layer_backward(layer.pyramid, pass.traces[l], delta);
    grads.angle_grads[l] = std::move(lg.angle_grads);
    delta_a = std::move(lg.delta_in);
  }
  return grads;
}

void sgd_step(Network& net, const NetworkGradients& grads, double lr) {
  auto layers = net.layers();
  if (grads.angle_grads.size() != layers.size()) throw DimensionError("sgd_step: gradient layer count mismatch");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (grads.angle_grads[l].size() != layers[l].pyramid.size())
      throw DimensionError("sgd_step: angle gradient shape mismatch at layer " + std::to_string(l));
    const std::size_t bias_len = layers[l].bias ? layers[l].bias->size() : 0;
    if (l < grads.bias_grads.size() && !grads.bias_grads[l].empty() && grads.bias_grads[l].size() != bias_len)
      throw DimensionError("sgd_step: bias gradient shape mismatch at layer " + std::to_string(l));
    if (!all_finite(grads.angle_grads[l]) || (l < grads.bias_grads.size() && !all_finite(grads.bias_grads[l])))
      throw DomainError("sgd_step: non-finite gradient at layer " + std::to_string(l));
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto& layer = layers[l];
    for (std::size_t k = 0; k < layer.pyramid.size(); ++k)
      layer.pyramid.set_angle(k, layer.pyramid.angle(k) - lr * grads.angle_grads[l][k]);
    if (layer.bias && l < grads.bias_grads.size() && !grads.bias_grads[l].empty())
      for (std::size_t j = 0; j < layer.bias->size(); ++j) (*layer.bias)[j] -= lr * grads.bias_grads[l][j];
  }
}

}  // namespace pyramidnet
