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

#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pyramidnet/linalg.hpp"
#include "pyramidnet/pyramid.hpp"

namespace pyramidnet {

enum class Activation { kSigmoid, kRelu, kIdentity };
enum class Loss { kSoftmaxCrossEntropy, kMse };

double activate(Activation a, double z);
/// d sigma / dz evaluated at z.
double activation_derivative(Activation a, double z);

std::string_view to_string(Activation a);
std::string_view to_string(Loss l);
Activation parse_activation(std::string_view name);
Loss parse_loss(std::string_view name);

struct NetworkLayer {
  PyramidLayer pyramid;
  std::optional<Vec> bias;
  Activation activation = Activation::kSigmoid;
};

/// Stacked pyramid layers; n_out of layer l equals n_in of layer l+1.
class Network {
 public:
  Network() = default;
  Network(std::vector<NetworkLayer> layers, Loss loss);

  struct Options {
    Activation hidden_activation = Activation::kSigmoid;
    Activation output_activation = Activation::kIdentity;
    bool bias = false;
    Loss loss = Loss::kSoftmaxCrossEntropy;
  };
  /// Random angles in (-pi, pi]; biases start at zero.
  static Network random(std::span<const int> architecture, const Options& options,
                        std::mt19937_64& rng);

  std::span<const NetworkLayer> layers() const { return layers_; }
  std::span<NetworkLayer> layers() { return layers_; }
  Loss loss() const { return loss_; }
  int input_size() const { return layers_.front().pyramid.n_in(); }
  int output_size() const { return layers_.back().pyramid.n_out(); }
  std::vector<int> architecture() const;

 private:
  std::vector<NetworkLayer> layers_;
  Loss loss_ = Loss::kSoftmaxCrossEntropy;
};

struct NetworkForward {
  Vec output;
  std::vector<ForwardTrace> traces;     // one per layer
  std::vector<Vec> pre_activations;     // z^l
  std::vector<Vec> post_activations;    // a^l
};

NetworkForward network_forward(const Network& net, std::span<const double> x);
/// Output only; skips trace storage.
Vec network_predict(const Network& net, std::span<const double> x);

using Target = std::variant<int, Vec>;  // class index or target vector

struct LossDelta {
  double loss = 0.0;
  Vec delta;  // dC / d output
};

/// softmax-CE: delta = softmax(output) - onehot(target).
/// mse: C = 1/2 |output - target|^2, delta = output - target.
LossDelta loss_and_delta(Loss loss, std::span<const double> output, const Target& target);

/// Inner errors delta^0 .. delta^T of one backward pass.
struct BackwardTrace {
  std::vector<Vec> inner_errors;
};

struct LayerGradient {
  Vec angle_grads;  // slot order
  Vec delta_in;     // dC / d(layer input)
  std::size_t gate_visits = 0;
  std::optional<BackwardTrace> trace;
};

/// Angle gradients of one pyramid layer from its forward trace and the error
/// at its output. Rectangular layers pad the discarded wires' error with 0.
LayerGradient layer_backward(const PyramidLayer& layer, const ForwardTrace& trace,
                             std::span<const double> delta_out, bool keep_trace = false);

struct NetworkGradients {
  std::vector<Vec> angle_grads;  // per layer
  std::vector<Vec> bias_grads;   // per layer; empty when the layer has no bias
  double loss = 0.0;

  /// Zero gradients shaped like `net`.
  static NetworkGradients zeros_like(const Network& net);
  void accumulate(const NetworkGradients& other);
  void scale(double factor);
};

NetworkGradients network_backward(const Network& net, const NetworkForward& pass,
                                  const Target& target);

/// theta <- theta - lr * grad (canonicalised), b <- b - lr * grad_b.
/// Throws DomainError before touching `net` if any gradient is non-finite.
void sgd_step(Network& net, const NetworkGradients& grads, double lr);

}  // namespace pyramidnet
