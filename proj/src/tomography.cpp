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

#include "pyramidnet/tomography.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace pyramidnet::qsim {

namespace {

struct Distribution {
  Vec p;  // over the full basis, renormalised after post-selection
  double discard_fraction = 0.0;
  bool empty = false;
};

// Outcome distribution of `state`, exact or from shots, with optional
// post-selection on Hamming weight one over qubits [0, register_size).
Distribution measure(const StateVector& state, int register_size, const TomographyConfig& cfg,
                     const NoiseModel& noise) {
  const std::size_t dim = state.dimension();
  const std::size_t reg_mask = (std::size_t{1} << register_size) - 1;
  Distribution out;
  out.p.assign(dim, 0.0);
  if (cfg.analytic()) {
    out.p = outcome_probabilities(state, noise);
    if (cfg.mitigate) {
      double kept = 0.0;
      double dropped = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        if (std::popcount(i & reg_mask) != 1) {
          dropped += out.p[i];
          out.p[i] = 0.0;
        } else {
          kept += out.p[i];
        }
      }
      if (kept <= 0.0) throw DomainError("post-selection removed every outcome");
      for (double& v : out.p) v /= kept;
      out.discard_fraction = dropped;
    }
    return out;
  }
  Counts counts = sample_shots(state, cfg, noise);
  if (cfg.mitigate) {
    std::vector<int> reg(register_size);
    std::iota(reg.begin(), reg.end(), 0);
    MitigationResult m = mitigate_unary(counts, reg);
    counts = std::move(m.kept);
    out.discard_fraction = m.discard_fraction;
  }
  std::uint64_t total = 0;
  for (const auto& [bits, c] : counts) total += c;
  for (const auto& [bits, c] : counts) out.p[parse_bitstring(bits)] = static_cast<double>(c) / static_cast<double>(total);
  return out;
}

void check_input(const PyramidLayer& layer, std::span<const double> x) {
  if (static_cast<int>(x.size()) != layer.n_in()) {
    throw DimensionError("tomography: input has " + std::to_string(x.size()) + " components, layer expects " +
                         std::to_string(layer.n_in()));
  }
}

StateVector loaded_through(const PyramidLayer& layer, std::span<const double> x, int n_qubits) {
  StateVector state(n_qubits);
  apply_loader(state, load_angles(x));
  apply_pyramid(state, layer);
  return state;
}

}  // namespace

TomographyResult tomography_pairwise(const PyramidLayer& layer, std::span<const double> x,
                                     const TomographyConfig& cfg, const NoiseModel& noise) {
  check_input(layer, x);
  const int n = layer.n_in();
  const int m = layer.n_out();
  const StateVector base = loaded_through(layer, x, n);

  TomographyResult out;
  out.estimate.assign(m, 0.0);

  const Distribution a = measure(base, n, cfg, noise);
  out.discard_fraction = a.discard_fraction;
  // exact probabilities this small are rounding residue; shots would never see them
  const double floor = cfg.analytic() ? 1e-24 : 0.0;
  auto seen = [floor](double p) { return p > floor; };
  std::vector<bool> signal(m);
  for (int j = 0; j < m; ++j) {
    const double p = a.p[unary_index(j)];
    signal[j] = seen(p);
    out.estimate[j] = std::sqrt(p);
  }
  if (m == 1) return out;

  // relative[k]: true when y_k and y_{k+1} differ in sign. linked[k]: the
  // comparator saw any counts.
  std::vector<bool> relative(m - 1, false);
  std::vector<bool> linked(m - 1, true);
  for (int offset = 0; offset < 2; ++offset) {
    if (offset + 1 >= m) break;
    StateVector state = base;
    for (int k = offset; k + 1 < m; k += 2) apply_rbs(state, k, k + 1, std::numbers::pi / 4.0);
    TomographyConfig sub = cfg;
    sub.seed = cfg.seed + 1 + static_cast<std::uint64_t>(offset);
    const Distribution d = measure(state, n, sub, noise);
    out.discard_fraction = std::max(out.discard_fraction, d.discard_fraction);
    for (int k = offset; k + 1 < m; k += 2) {
      const double minus = d.p[unary_index(k)];
      const double plus = d.p[unary_index(k + 1)];
      linked[k] = seen(minus) || seen(plus);
      relative[k] = minus > plus;
    }
  }

  // A missing link only matters when there is signal on both sides of it.
  std::vector<int> unresolved;
  for (int k = 0; k + 1 < m; ++k) {
    if (linked[k]) continue;
    const bool before = std::any_of(signal.begin(), signal.begin() + k + 1, [](bool v) { return v; });
    const bool after = std::any_of(signal.begin() + k + 1, signal.end(), [](bool v) { return v; });
    if (before && after) {
      unresolved.push_back(k);
      unresolved.push_back(k + 1);
    }
  }
  if (!unresolved.empty()) {
    unresolved.erase(std::unique(unresolved.begin(), unresolved.end()), unresolved.end());
    std::string list;
    for (int i : unresolved) list += (list.empty() ? "" : ",") + std::to_string(i);
    throw TomographyError("tomography_pairwise: unresolved sign links at indices " + list, unresolved);
  }

  double sign = 1.0;
  for (int k = 0; k + 1 < m; ++k) {
    if (linked[k] && relative[k]) sign = -sign;
    out.estimate[k + 1] *= sign;
  }
  return out;
}

TomographyResult tomography_ancilla(const PyramidLayer& layer, std::span<const double> x,
                                    const TomographyConfig& cfg, const NoiseModel& noise) {
  check_input(layer, x);
  const int n = layer.n_in();
  const int m = layer.n_out();
  if (n + 1 > StateVector::kMaxQubits) {
    throw DomainError("tomography_ancilla: needs " + std::to_string(n + 1) + " qubits, cap is " +
                      std::to_string(StateVector::kMaxQubits));
  }
  const int anc = n;
  const LoaderAngles data = load_angles(x);
  const Vec uniform_vec(n, 1.0 / std::sqrt(static_cast<double>(n)));
  const LoaderAngles uniform = load_angles(uniform_vec);

  StateVector state(n + 1);
  apply_h(state, anc);
  apply_cnot(state, anc, 0);
  apply_loader_cascade(state, data);
  apply_pyramid(state, layer);
  apply_x(state, anc);
  apply_loader_cascade(state, uniform, 0, true);
  apply_cnot(state, anc, 0);
  apply_loader_cascade(state, uniform);
  apply_h(state, anc);

  const Distribution d = measure(state, n, cfg, noise);
  TomographyResult out;
  out.discard_fraction = d.discard_fraction;
  out.estimate.assign(m, 0.0);
  const double u = uniform_vec[0];
  const std::size_t anc_bit = std::size_t{1} << anc;
  for (int j = 0; j < m; ++j) {
    const double p0 = d.p[unary_index(j)];
    const double p1 = d.p[unary_index(j) | anc_bit];
    out.estimate[j] = p0 >= p1 ? 2.0 * std::sqrt(p0) - u : u - 2.0 * std::sqrt(p1);
  }
  return out;
}

std::string_view to_string(Procedure p) {
  return p == Procedure::kPairwise ? "pairwise" : "ancilla";
}

Procedure parse_procedure(std::string_view name) {
  if (name == "pairwise") return Procedure::kPairwise;
  if (name == "ancilla") return Procedure::kAncilla;
  throw DomainError("unknown tomography procedure '" + std::string(name) + "' (expected pairwise|ancilla)");
}

Vec multilayer_quantum_inference(const Network& net, std::span<const double> x, const TomographyConfig& cfg,
                                 const NoiseModel& noise, Procedure procedure) {
  if (static_cast<int>(x.size()) != net.input_size()) {
    throw DimensionError("multilayer_quantum_inference: input size " + std::to_string(x.size()) +
                         " does not match network input " + std::to_string(net.input_size()));
  }
  Vec current(x.begin(), x.end());
  const auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const double scale = norm2(current);
    if (!(scale > 1e-300)) {
      throw DomainError("multilayer_quantum_inference: zero vector entering layer " + std::to_string(l));
    }
    Vec unit = current;
    for (double& v : unit) v /= scale;
    TomographyConfig sub = cfg;
    sub.seed = cfg.seed + l;
    TomographyResult r = procedure == Procedure::kPairwise ? tomography_pairwise(layers[l].pyramid, unit, sub, noise)
                                                           : tomography_ancilla(layers[l].pyramid, unit, sub, noise);
    Vec next = std::move(r.estimate);
    for (std::size_t j = 0; j < next.size(); ++j) {
      next[j] *= scale;
      if (layers[l].bias) next[j] += (*layers[l].bias)[j];
      next[j] = activate(layers[l].activation, next[j]);
    }
    current = std::move(next);
  }
  return current;
}

}  // namespace pyramidnet::qsim
