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
#include <numeric>

#include "pyramidnet/data.hpp"
#include "pyramidnet/tomography.hpp"
#include "test_util.hpp"

namespace pyramidnet::qsim {
namespace {

using testing::random_unit;

TomographyConfig analytic() { return TomographyConfig{}; }

TomographyConfig shots(std::uint64_t n, std::uint64_t seed) {
  TomographyConfig cfg;
  cfg.shots = n;
  cfg.seed = seed;
  return cfg;
}

double linf(const Vec& a, const Vec& b) { return max_abs_diff(a, b); }

double linf_up_to_sign(const Vec& a, const Vec& b) {
  Vec neg = a;
  for (double& v : neg) v = -v;
  return std::min(linf(a, b), linf(neg, b));
}

TEST(Pairwise, AllPositiveOutputIsExact) {
  const Vec x{0.1, 0.5, 0.7, std::sqrt(1.0 - 0.01 - 0.25 - 0.49)};
  const TomographyResult r = tomography_pairwise(PyramidLayer(4, 4), x, analytic(), {});
  EXPECT_LE(linf(r.estimate, x), 1e-15);
  EXPECT_EQ(r.discard_fraction, 0.0);
}

TEST(Pairwise, DetectsSignChange) {
  const Vec x{0.6, -0.8};
  EXPECT_LE(linf(tomography_pairwise(PyramidLayer(2, 2), x, analytic(), {}).estimate, x), 1e-15);
  const Vec y{0.5, -0.5, -0.5, 0.5};
  EXPECT_LE(linf(tomography_pairwise(PyramidLayer(4, 4), y, analytic(), {}).estimate, y), 1e-15);
}

TEST(Pairwise, AnalyticMatchesClassicalUpToGlobalSign) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 9;
    const PyramidLayer layer = PyramidLayer::random(n, n, rng);
    const Vec x = random_unit(n, rng);
    const Vec y = forward(layer, x).y;
    const Vec est = tomography_pairwise(layer, x, analytic(), {}).estimate;
    EXPECT_LE(linf_up_to_sign(est, y), 1e-10);
    EXPECT_GE(est[0], 0.0);
  }
}

TEST(Pairwise, RectangularLayer) {
  std::mt19937_64 rng(2);
  const PyramidLayer layer = PyramidLayer::random(7, 3, rng);
  const Vec x = random_unit(7, rng);
  const Vec est = tomography_pairwise(layer, x, analytic(), {}).estimate;
  EXPECT_EQ(est.size(), 3u);
  EXPECT_LE(linf_up_to_sign(est, forward(layer, x).y), 1e-10);
}

TEST(Pairwise, GapWithSignalOnBothSidesIsUnresolved) {
  const double a = std::sqrt(0.5);
  try {
    tomography_pairwise(PyramidLayer(4, 4), Vec{a, 0.0, 0.0, -a}, analytic(), {});
    FAIL() << "expected TomographyError";
  } catch (const TomographyError& e) {
    EXPECT_EQ(e.unresolved_indices(), (std::vector<int>{1, 2}));
  }
}

TEST(Pairwise, TrailingZerosAreHarmless) {
  const Vec x{0.6, -0.8, 0.0, 0.0};
  EXPECT_LE(linf(tomography_pairwise(PyramidLayer(4, 4), x, analytic(), {}).estimate, x), 1e-15);
}

TEST(Ancilla, BasisOutput) {
  const Vec x{1.0, 0.0, 0.0, 0.0};
  const Vec est = tomography_ancilla(PyramidLayer(4, 4), x, analytic(), {}).estimate;
  EXPECT_LE(linf(est, x), 1e-14);
}

TEST(Ancilla, UniformOutputCancelsSecondBranch) {
  const Vec u(5, 1.0 / std::sqrt(5.0));
  const Vec est = tomography_ancilla(PyramidLayer(5, 5), u, analytic(), {}).estimate;
  EXPECT_LE(linf(est, u), 1e-14);
}

TEST(Ancilla, AnalyticMatchesClassical) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 9;
    const int d = trial % 3 == 0 ? 1 + static_cast<int>(rng() % n) : n;
    const PyramidLayer layer = PyramidLayer::random(n, d, rng);
    const Vec x = random_unit(n, rng);
    EXPECT_LE(linf(tomography_ancilla(layer, x, analytic(), {}).estimate, forward(layer, x).y), 1e-10);
  }
}

TEST(Ancilla, SizeCap) {
  Vec x(16, 0.0);
  x[0] = 1.0;
  EXPECT_THROW(tomography_ancilla(PyramidLayer(16, 16), x, analytic(), {}), DomainError);
}

TEST(Tomography, InputChecks) {
  EXPECT_THROW(tomography_ancilla(PyramidLayer(4, 4), Vec{1.0, 0.0}, analytic(), {}), DimensionError);
  EXPECT_THROW(tomography_pairwise(PyramidLayer(2, 2), Vec{1.0, 1.0}, analytic(), {}), DomainError);
}

TEST(Tomography, ShotsAreSeeded) {
  std::mt19937_64 rng(4);
  const PyramidLayer layer = PyramidLayer::random(6, 6, rng);
  const Vec x = random_unit(6, rng);
  EXPECT_EQ(tomography_ancilla(layer, x, shots(4000, 9), {}).estimate,
            tomography_ancilla(layer, x, shots(4000, 9), {}).estimate);
  EXPECT_NE(tomography_ancilla(layer, x, shots(4000, 9), {}).estimate,
            tomography_ancilla(layer, x, shots(4000, 10), {}).estimate);
}

TEST(Tomography, ErrorShrinksAsInverseSqrtShots) {
  std::mt19937_64 rng(5);
  const PyramidLayer layer = PyramidLayer::random(8, 8, rng);
  const Vec x = random_unit(8, rng);
  const Vec y = forward(layer, x).y;
  std::vector<double> log_shots;
  std::vector<double> log_err;
  for (std::uint64_t s : {1000ULL, 10000ULL, 100000ULL, 1000000ULL}) {
    double mean = 0.0;
    const int trials = 12;
    for (int t = 0; t < trials; ++t) mean += linf(tomography_ancilla(layer, x, shots(s, 100 + t), {}).estimate, y);
    log_shots.push_back(std::log(static_cast<double>(s)));
    log_err.push_back(std::log(mean / trials));
  }
  const double mx = std::accumulate(log_shots.begin(), log_shots.end(), 0.0) / 4;
  const double my = std::accumulate(log_err.begin(), log_err.end(), 0.0) / 4;
  double sxy = 0.0;
  double sxx = 0.0;
  for (int i = 0; i < 4; ++i) {
    sxy += (log_shots[i] - mx) * (log_err[i] - my);
    sxx += (log_shots[i] - mx) * (log_shots[i] - mx);
  }
  EXPECT_NEAR(sxy / sxx, -0.5, 0.1);
}

TEST(Tomography, MitigationHelpsUnderBitFlips) {
  std::mt19937_64 rng(6);
  int wins = 0;
  const int trials = 20;
  for (int t = 0; t < trials; ++t) {
    const PyramidLayer layer = PyramidLayer::random(8, 8, rng);
    const Vec x = random_unit(8, rng);
    const Vec y = forward(layer, x).y;
    TomographyConfig on = shots(100000, 1000 + t);
    TomographyConfig off = on;
    off.mitigate = false;
    const TomographyResult with = tomography_ancilla(layer, x, on, {0.01});
    const TomographyResult without = tomography_ancilla(layer, x, off, {0.01});
    EXPECT_GT(with.discard_fraction, 0.0);
    wins += linf(with.estimate, y) < linf(without.estimate, y);
  }
  EXPECT_GE(wins, 16);
}

TEST(Tomography, AnalyticNoiseMitigationDiscardFraction) {
  std::mt19937_64 rng(7);
  const PyramidLayer layer = PyramidLayer::random(4, 4, rng);
  const Vec x = random_unit(4, rng);
  const TomographyResult r = tomography_pairwise(layer, x, analytic(), {0.1});
  // weight-one survivors of a weight-one state: no flip, or the set bit and
  // exactly one other bit flipped
  const double kept = std::pow(0.9, 4) + 3 * 0.1 * 0.1 * std::pow(0.9, 2);
  EXPECT_NEAR(r.discard_fraction, 1.0 - kept, 1e-12);
}

TEST(Procedure, Parsing) {
  EXPECT_EQ(parse_procedure("pairwise"), Procedure::kPairwise);
  EXPECT_EQ(parse_procedure(to_string(Procedure::kAncilla)), Procedure::kAncilla);
  EXPECT_THROW(parse_procedure("other"), DomainError);
}

TEST(Multilayer, IdentityLayerAppliesActivation) {
  const Network net({NetworkLayer{PyramidLayer(3, 3), std::nullopt, Activation::kSigmoid}}, Loss::kMse);
  const Vec x{0.3, -1.2, 2.0};
  const Vec out = multilayer_quantum_inference(net, x, analytic(), {});
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(out[j], activate(Activation::kSigmoid, x[j]), 1e-12);
}

TEST(Multilayer, AnalyticMatchesClassicalForward) {
  std::mt19937_64 rng(8);
  Network::Options opts;
  opts.bias = true;
  for (int trial = 0; trial < 10; ++trial) {
    Network net = Network::random(std::vector<int>{4, 4, 2}, opts, rng);
    for (auto& layer : net.layers()) *layer.bias = testing::random_vec(layer.bias->size(), rng);
    const Vec x = random_unit(4, rng);
    EXPECT_LE(linf(multilayer_quantum_inference(net, x, analytic(), {}), network_predict(net, x)), 1e-8);
  }
}

TEST(Multilayer, ShotBasedClassificationAgrees) {
  std::mt19937_64 rng(9);
  const auto d = data::prepare_synthetic(200, 200, 4, 6.0, 21);
  const Network net = Network::random(std::vector<int>{4, 4, 2}, {}, rng);
  int agree = 0;
  for (std::size_t s = 0; s < 200; ++s) {
    const auto x = d.test.features.row(s);
    const Vec q = multilayer_quantum_inference(net, x, shots(100000, s), {});
    const Vec c = network_predict(net, x);
    agree += (q[0] > q[1]) == (c[0] > c[1]);
  }
  EXPECT_GE(agree, 190);
}

TEST(Multilayer, ZeroIntermediateVectorThrows) {
  std::vector<NetworkLayer> layers{{PyramidLayer(2, 2), std::nullopt, Activation::kRelu},
                                   {PyramidLayer(2, 2), std::nullopt, Activation::kIdentity}};
  const Network net(layers, Loss::kMse);
  EXPECT_THROW(multilayer_quantum_inference(net, Vec{-0.6, -0.8}, analytic(), {}), DomainError);
  EXPECT_THROW(multilayer_quantum_inference(net, Vec{1.0}, analytic(), {}), DimensionError);
}

}  // namespace
}  // namespace pyramidnet::qsim
