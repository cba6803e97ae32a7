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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "pyramidnet/network.hpp"
#include "test_util.hpp"

namespace pyramidnet {
namespace {

using testing::random_unit;
using testing::random_vec;

double total_loss(const Network& net, const Vec& x, const Target& t) {
  return loss_and_delta(net.loss(), network_forward(net, x).output, t).loss;
}

struct FdReport {
  double worst_rel = 0.0;
  std::size_t checked = 0;
};

// Central differences, h = 1e-6. The floor keeps gradients that are zero up to
// roundoff from dominating the relative measure.
FdReport finite_difference_check(Network net, const Vec& x, const Target& t) {
  const double h = 1e-6;
  const NetworkGradients g = network_backward(net, network_forward(net, x), t);
  FdReport r;
  auto compare = [&](double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-4});
    r.worst_rel = std::max(r.worst_rel, std::abs(analytic - numeric) / denom);
    ++r.checked;
  };
  auto layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    PyramidLayer& p = layers[l].pyramid;
    for (std::size_t k = 0; k < p.angles().size(); ++k) {
      const double theta = p.angle(k);
      p.set_angle(k, theta + h);
      const double up = total_loss(net, x, t);
      p.set_angle(k, theta - h);
      const double down = total_loss(net, x, t);
      p.set_angle(k, theta);
      compare(g.angle_grads[l][k], (up - down) / (2 * h));
    }
    if (!layers[l].bias) continue;
    Vec& b = *layers[l].bias;
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double v = b[j];
      b[j] = v + h;
      const double up = total_loss(net, x, t);
      b[j] = v - h;
      const double down = total_loss(net, x, t);
      b[j] = v;
      compare(g.bias_grads[l][j], (up - down) / (2 * h));
    }
  }
  return r;
}

Network single_layer(PyramidLayer p, Activation a, Loss loss = Loss::kMse) {
  return Network({NetworkLayer{std::move(p), std::nullopt, a}}, loss);
}

TEST(Activations, ValuesAndDerivatives) {
  EXPECT_DOUBLE_EQ(activate(Activation::kSigmoid, 0.0), 0.5);
  EXPECT_DOUBLE_EQ(activation_derivative(Activation::kSigmoid, 0.0), 0.25);
  EXPECT_EQ(activate(Activation::kRelu, -2.0), 0.0);
  EXPECT_EQ(activate(Activation::kRelu, 2.0), 2.0);
  EXPECT_EQ(activation_derivative(Activation::kRelu, 2.0), 1.0);
  EXPECT_EQ(activation_derivative(Activation::kIdentity, 7.0), 1.0);
  EXPECT_EQ(parse_activation("relu"), Activation::kRelu);
  EXPECT_THROW(parse_activation("tanh"), DomainError);
  EXPECT_EQ(parse_loss(to_string(Loss::kMse)), Loss::kMse);
}

TEST(NetworkForward, IdentityLayerPassesInputThrough) {
  const Network net = single_layer(PyramidLayer(4, 4), Activation::kIdentity);
  const Vec x{0.1, -0.2, 0.3, 0.4};
  EXPECT_EQ(network_forward(net, x).output, x);
}

TEST(NetworkForward, QuarterTurn) {
  const Network net =
      single_layer(PyramidLayer(PyramidSchedule::build(2, 2), Vec{std::numbers::pi / 2}), Activation::kIdentity);
  const Vec y = network_forward(net, Vec{1.0, 0.0}).output;
  EXPECT_NEAR(y[0], 0.0, 1e-16);
  EXPECT_NEAR(y[1], -1.0, 1e-16);
}

TEST(NetworkForward, MatchesDenseComposition) {
  std::mt19937_64 rng(1);
  Network::Options opts;
  opts.bias = true;
  Network net = Network::random(std::vector<int>{4, 4, 2}, opts, rng);
  for (auto& layer : net.layers()) *layer.bias = random_vec(layer.bias->size(), rng);
  const Vec x = random_vec(4, rng);
  Vec a = x;
  for (const auto& layer : net.layers()) {
    Vec z = matvec(matrix_from_angles(layer.pyramid), a);
    for (std::size_t j = 0; j < z.size(); ++j) z[j] = activate(layer.activation, z[j] + (*layer.bias)[j]);
    a = z;
  }
  EXPECT_LE(max_abs_diff(network_forward(net, x).output, a), 1e-10);
  EXPECT_LE(max_abs_diff(network_predict(net, x), a), 1e-15);
}

TEST(NetworkForward, SizeChecks) {
  std::mt19937_64 rng(2);
  const Network net = Network::random(std::vector<int>{4, 2}, {}, rng);
  EXPECT_THROW(network_forward(net, Vec{1.0, 2.0}), DimensionError);
  std::vector<NetworkLayer> broken{{PyramidLayer(4, 3), std::nullopt, Activation::kIdentity},
                                   {PyramidLayer(4, 2), std::nullopt, Activation::kIdentity}};
  EXPECT_THROW(Network(broken, Loss::kMse), DimensionError);
  std::vector<NetworkLayer> bad_bias{{PyramidLayer(4, 2), Vec{0.0}, Activation::kIdentity}};
  EXPECT_THROW(Network(bad_bias, Loss::kMse), DimensionError);
}

TEST(Loss, MseAtTarget) {
  const LossDelta r = loss_and_delta(Loss::kMse, Vec{0.2, -0.4}, Target{Vec{0.2, -0.4}});
  EXPECT_EQ(r.loss, 0.0);
  EXPECT_EQ(r.delta, (Vec{0.0, 0.0}));
}

TEST(Loss, SoftmaxSymmetricCase) {
  const LossDelta r = loss_and_delta(Loss::kSoftmaxCrossEntropy, Vec{0.0, 0.0}, Target{0});
  EXPECT_NEAR(r.loss, std::log(2.0), 1e-15);
  EXPECT_NEAR(r.delta[0], -0.5, 1e-15);
  EXPECT_NEAR(r.delta[1], 0.5, 1e-15);
}

TEST(Loss, SoftmaxMatchesScalarRecomputation) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec out = random_vec(5, rng);
    const int cls = trial % 5;
    long double z = 0.0L;
    for (double v : out) z += std::exp(static_cast<long double>(v));
    const LossDelta r = loss_and_delta(Loss::kSoftmaxCrossEntropy, out, Target{cls});
    EXPECT_NEAR(r.loss, static_cast<double>(std::log(z) - out[cls]), 1e-12);
    for (int j = 0; j < 5; ++j) {
      const double p = static_cast<double>(std::exp(static_cast<long double>(out[j])) / z);
      EXPECT_NEAR(r.delta[j], p - (j == cls ? 1.0 : 0.0), 1e-12);
    }
  }
}

TEST(Loss, SoftmaxIsStableForLargeLogits) {
  const LossDelta r = loss_and_delta(Loss::kSoftmaxCrossEntropy, Vec{1000.0, 0.0}, Target{1});
  EXPECT_NEAR(r.loss, 1000.0, 1e-9);
  EXPECT_TRUE(std::isfinite(r.delta[0]));
}

TEST(Loss, ClassOutOfRangeThrows) {
  EXPECT_THROW(loss_and_delta(Loss::kSoftmaxCrossEntropy, Vec{0.0, 0.0}, Target{2}), DomainError);
  EXPECT_THROW(loss_and_delta(Loss::kSoftmaxCrossEntropy, Vec{0.0, 0.0}, Target{-1}), DomainError);
  EXPECT_THROW(loss_and_delta(Loss::kMse, Vec{0.0, 0.0}, Target{Vec{1.0}}), DimensionError);
}

TEST(LayerBackward, ZeroErrorGivesZeroGradients) {
  std::mt19937_64 rng(4);
  const PyramidLayer layer = PyramidLayer::random(6, 6, rng);
  const ForwardResult f = forward(layer, random_vec(6, rng), true);
  const LayerGradient g = layer_backward(layer, *f.trace, Vec(6, 0.0));
  for (double v : g.angle_grads) EXPECT_EQ(v, 0.0);
  for (double v : g.delta_in) EXPECT_EQ(v, 0.0);
}

TEST(LayerBackward, TwoWireAnalytic) {
  for (double theta : {-2.0, -0.4, 0.0, 0.9, 2.5}) {
    const PyramidLayer layer(PyramidSchedule::build(2, 2), Vec{theta});
    const ForwardResult f = forward(layer, Vec{1.0, 0.0}, true);
    // C = 1/2 (y0 - 1)^2, dC/dy = (y0 - 1, 0)
    const LayerGradient g = layer_backward(layer, *f.trace, Vec{f.y[0] - 1.0, 0.0});
    EXPECT_NEAR(g.angle_grads[0], (std::cos(theta) - 1.0) * (-std::sin(theta)), 1e-10);
  }
}

TEST(LayerBackward, InnerErrorsFollowTransposedTimesteps) {
  std::mt19937_64 rng(5);
  const PyramidLayer layer = PyramidLayer::random(5, 5, rng);
  const ForwardResult f = forward(layer, random_vec(5, rng), true);
  const Vec delta = random_vec(5, rng);
  const LayerGradient g = layer_backward(layer, *f.trace, delta, true);
  ASSERT_TRUE(g.trace.has_value());
  EXPECT_EQ(g.trace->inner_errors.size(), f.trace->inner_layers.size());
  // delta_in = W^T delta
  EXPECT_LE(max_abs_diff(g.delta_in, matvec_transposed(matrix_from_angles(layer), delta)), 1e-12);
  EXPECT_EQ(g.trace->inner_errors.front(), g.delta_in);
}

TEST(LayerBackward, RectangularPadsDiscardedWires) {
  std::mt19937_64 rng(6);
  const PyramidLayer layer = PyramidLayer::random(6, 2, rng);
  const ForwardResult f = forward(layer, random_vec(6, rng), true);
  const Vec delta = random_vec(2, rng);
  const LayerGradient g = layer_backward(layer, *f.trace, delta);
  EXPECT_LE(max_abs_diff(g.delta_in, matvec_transposed(matrix_from_angles(layer), delta)), 1e-12);
  EXPECT_THROW(layer_backward(layer, *f.trace, Vec(3, 0.0)), DimensionError);
}

TEST(LayerBackward, CostIsLinearInGates) {
  std::mt19937_64 rng(7);
  for (int n : {4, 8, 16, 32}) {
    const PyramidLayer layer = PyramidLayer::random(n, n, rng);
    const ForwardResult f = forward(layer, random_vec(n, rng), true);
    const LayerGradient g = layer_backward(layer, *f.trace, random_vec(n, rng));
    EXPECT_EQ(f.gate_visits + g.gate_visits, 2 * layer.schedule().size());
  }
}

TEST(Gradients, FiniteDifferenceSingleLayer) {
  std::mt19937_64 rng(8);
  const Network net = single_layer(PyramidLayer::random(8, 8, rng), Activation::kIdentity);
  const FdReport r = finite_difference_check(net, random_vec(8, rng), Target{random_vec(8, rng)});
  EXPECT_EQ(r.checked, 28u);
  EXPECT_LE(r.worst_rel, 1e-5);
}

TEST(Gradients, FiniteDifferenceDeepWithBias) {
  std::mt19937_64 rng(9);
  Network::Options opts;
  opts.bias = true;
  for (const std::vector<int>& arch : {std::vector<int>{4, 4, 2}, {8, 6, 3}, {16, 16, 4}}) {
    Network net = Network::random(arch, opts, rng);
    for (auto& layer : net.layers()) *layer.bias = random_vec(layer.bias->size(), rng);
    const FdReport r = finite_difference_check(net, random_unit(arch[0], rng), Target{1});
    EXPECT_LE(r.worst_rel, 1e-5) << arch[0];
  }
}

TEST(Gradients, ReluAndMse) {
  std::mt19937_64 rng(10);
  Network::Options opts;
  opts.hidden_activation = Activation::kRelu;
  opts.output_activation = Activation::kSigmoid;
  opts.loss = Loss::kMse;
  const Network net = Network::random(std::vector<int>{6, 5, 3}, opts, rng);
  const FdReport r = finite_difference_check(net, random_unit(6, rng), Target{Vec{1.0, 0.0, 0.0}});
  EXPECT_LE(r.worst_rel, 1e-5);
}

TEST(SgdStep, ZeroGradientsLeaveNetworkUnchanged) {
  std::mt19937_64 rng(11);
  Network net = Network::random(std::vector<int>{5, 3}, {}, rng);
  const Vec before(net.layers()[0].pyramid.angles().begin(), net.layers()[0].pyramid.angles().end());
  sgd_step(net, NetworkGradients::zeros_like(net), 0.5);
  EXPECT_EQ(Vec(net.layers()[0].pyramid.angles().begin(), net.layers()[0].pyramid.angles().end()), before);
}

TEST(SgdStep, SingleAngleUpdate) {
  Network net = single_layer(PyramidLayer(2, 2), Activation::kIdentity);
  NetworkGradients g = NetworkGradients::zeros_like(net);
  g.angle_grads[0][0] = 0.5;
  sgd_step(net, g, 1.0);
  EXPECT_DOUBLE_EQ(net.layers()[0].pyramid.angle(0), -0.5);
}

TEST(SgdStep, WrapsAnglesAndUpdatesBias) {
  Network::Options opts;
  opts.bias = true;
  std::mt19937_64 rng(12);
  Network net = Network::random(std::vector<int>{2, 2}, opts, rng);
  net.layers()[0].pyramid.set_angle(0, 3.0);
  NetworkGradients g = NetworkGradients::zeros_like(net);
  g.angle_grads[0][0] = -1.0;
  g.bias_grads[0] = Vec{1.0, -2.0};
  sgd_step(net, g, 0.5);
  EXPECT_NEAR(net.layers()[0].pyramid.angle(0), 3.5 - 2 * std::numbers::pi, 1e-15);
  EXPECT_EQ(*net.layers()[0].bias, (Vec{-0.5, 1.0}));
}

TEST(SgdStep, NonFiniteGradientAbortsWithoutMutation) {
  std::mt19937_64 rng(13);
  Network net = Network::random(std::vector<int>{3, 3}, {}, rng);
  const double before0 = net.layers()[0].pyramid.angle(0);
  const double before1 = net.layers()[0].pyramid.angle(1);
  NetworkGradients g = NetworkGradients::zeros_like(net);
  g.angle_grads[0][0] = 1.0;
  g.angle_grads[0][2] = NAN;
  EXPECT_THROW(sgd_step(net, g, 0.1), DomainError);
  EXPECT_EQ(net.layers()[0].pyramid.angle(0), before0);
  EXPECT_EQ(net.layers()[0].pyramid.angle(1), before1);
}

TEST(SgdStep, OrthogonalityHoldsAcrossManySteps) {
  std::mt19937_64 rng(14);
  Network net = single_layer(PyramidLayer::random(8, 8, rng), Activation::kIdentity);
  double worst = 0.0;
  for (int step = 0; step < 1000; ++step) {
    const NetworkForward pass = network_forward(net, random_unit(8, rng));
    sgd_step(net, network_backward(net, pass, Target{random_unit(8, rng)}), 0.1);
    worst = std::max(worst, orthogonality_deviation(matrix_from_angles(net.layers()[0].pyramid)));
  }
  EXPECT_LE(worst, 1e-10);
}

}  // namespace
}  // namespace pyramidnet
