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

#include "pyramidnet/statevector.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace pyramidnet::qsim {

namespace {

void check_qubit(const StateVector& state, int q, const char* op) {
  if (q < 0 || q >= state.n_qubits()) {
    throw DomainError(std::string(op) + ": qubit " + std::to_string(q) + " out of range for " +
                      std::to_string(state.n_qubits()) + " qubits");
  }
}

}  // namespace

StateVector::StateVector(int n_qubits) : n_qubits_(n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw DomainError("StateVector: qubit count " + std::to_string(n_qubits) + " outside [1, " +
                      std::to_string(kMaxQubits) + "]");
  }
  amps_.assign(std::size_t{1} << n_qubits, 0.0);
  amps_[0] = 1.0;
}

bool StateVector::is_ground(double tol) const {
  if (std::abs(amps_[0] - 1.0) > tol) return false;
  for (std::size_t i = 1; i < amps_.size(); ++i)
    if (std::abs(amps_[i]) > tol) return false;
  return true;
}

Vec StateVector::unary_amplitudes(int count) const {
  if (count < 0 || count > n_qubits_) throw DomainError("unary_amplitudes: bad count");
  Vec out(count);
  for (int w = 0; w < count; ++w) out[w] = amps_[unary_index(w)];
  return out;
}

double StateVector::non_unary_amplitude() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < amps_.size(); ++i)
    if (std::popcount(i) != 1) worst = std::max(worst, std::abs(amps_[i]));
  return worst;
}

void apply_x(StateVector& state, int qubit) {
  check_qubit(state, qubit, "apply_x");
  auto amps = state.amps();
  const std::size_t mask = std::size_t{1} << qubit;
  for (std::size_t i = 0; i < amps.size(); ++i)
    if (!(i & mask)) std::swap(amps[i], amps[i | mask]);
}

void apply_h(StateVector& state, int qubit) {
  check_qubit(state, qubit, "apply_h");
  auto amps = state.amps();
  const std::size_t mask = std::size_t{1} << qubit;
  const double r = std::numbers::sqrt2 / 2.0;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if (i & mask) continue;
    const double a = amps[i];
    const double b = amps[i | mask];
    amps[i] = r * (a + b);
    amps[i | mask] = r * (a - b);
  }
}

void apply_cnot(StateVector& state, int control, int target) {
  check_qubit(state, control, "apply_cnot");
  check_qubit(state, target, "apply_cnot");
  if (control == target) throw DomainError("apply_cnot: control == target");
  auto amps = state.amps();
  const std::size_t cmask = std::size_t{1} << control;
  const std::size_t tmask = std::size_t{1} << target;
  for (std::size_t i = 0; i < amps.size(); ++i)
    if ((i & cmask) && !(i & tmask)) std::swap(amps[i], amps[i | tmask]);
}

void apply_rbs(StateVector& state, int i, int j, double theta) {
  check_qubit(state, i, "apply_rbs");
  check_qubit(state, j, "apply_rbs");
  if (i == j) throw DomainError("apply_rbs: wires must differ");
  auto amps = state.amps();
  const std::size_t mi = std::size_t{1} << i;
  const std::size_t mj = std::size_t{1} << j;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  for (std::size_t idx = 0; idx < amps.size(); ++idx) {
    if (!(idx & mi) || (idx & mj)) continue;
    const std::size_t partner = idx ^ mi ^ mj;  // |0_i 1_j>
    const double one_zero = amps[idx];
    const double zero_one = amps[partner];
    amps[idx] = c * one_zero - s * zero_one;
    amps[partner] = s * one_zero + c * zero_one;
  }
}

void apply_pyramid(StateVector& state, const PyramidLayer& layer, int first_wire) {
  if (first_wire < 0 || first_wire + layer.n_in() > state.n_qubits()) {
    throw DomainError("apply_pyramid: layer does not fit the register");
  }
  const auto slots = layer.schedule().slots();
  for (std::size_t k = 0; k < slots.size(); ++k) {
    const int w = first_wire + slots[k].wire;
    apply_rbs(state, w + 1, w, layer.angle(k));
  }
}

LoaderAngles load_angles(std::span<const double> x) {
  if (x.size() < 2) throw DomainError("load_angles: need at least two components");
  const double n = norm2(x);
  if (!(std::abs(n - 1.0) <= 1e-9)) {
    throw DomainError("load_angles: input is not normalised (norm " + std::to_string(n) + ")");
  }
  const std::size_t d = x.size();
  LoaderAngles out{Vec(d - 1, 0.0)};
  Vec tail(d + 1, 0.0);  // tail[k] = |x[k:]|
  for (std::size_t k = d; k-- > 0;) tail[k] = std::hypot(tail[k + 1], x[k]);
  for (std::size_t k = 0; k + 1 < d; ++k) {
    if (tail[k] < 1e-12) break;
    out.alphas[k] = (k + 2 == d) ? std::atan2(x[k + 1], x[k]) : std::atan2(tail[k + 1], x[k]);
  }
  return out;
}

void apply_loader_cascade(StateVector& state, const LoaderAngles& loader, int first_wire, bool adjoint) {
  const int gates = static_cast<int>(loader.alphas.size());
  if (first_wire < 0 || first_wire + gates >= state.n_qubits()) {
    throw DomainError("loader does not fit the register");
  }
  if (!adjoint) {
    for (int k = 0; k < gates; ++k) apply_rbs(state, first_wire + k, first_wire + k + 1, loader.alphas[k]);
  } else {
    for (int k = gates - 1; k >= 0; --k) apply_rbs(state, first_wire + k, first_wire + k + 1, -loader.alphas[k]);
  }
}

void apply_loader(StateVector& state, const LoaderAngles& loader, int first_wire) {
  if (!state.is_ground()) throw DomainError("apply_loader: state is not |0...0>");
  apply_x(state, first_wire);
  apply_loader_cascade(state, loader, first_wire);
}

void NoiseModel::validate() const {
  if (!(bitflip_p >= 0.0 && bitflip_p < 1.0)) {
    throw DomainError("NoiseModel: bitflip_p must be in [0, 1), got " + std::to_string(bitflip_p));
  }
}

std::string bitstring(std::uint64_t index, int n_qubits) {
  std::string s(n_qubits, '0');
  for (int q = 0; q < n_qubits; ++q)
    if (index >> q & 1U) s[q] = '1';
  return s;
}

std::uint64_t parse_bitstring(const std::string& bits) {
  std::uint64_t index = 0;
  for (std::size_t q = 0; q < bits.size(); ++q) {
    if (bits[q] == '1') {
      index |= std::uint64_t{1} << q;
    } else if (bits[q] != '0') {
      throw DomainError("parse_bitstring: bad character in '" + bits + "'");
    }
  }
  return index;
}

Vec outcome_probabilities(const StateVector& state, const NoiseModel& noise) {
  noise.validate();
  Vec p(state.dimension());
  const auto amps = state.amps();
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = amps[i] * amps[i];
  const double f = noise.bitflip_p;
  if (f == 0.0) return p;
  for (int q = 0; q < state.n_qubits(); ++q) {
    const std::size_t mask = std::size_t{1} << q;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (i & mask) continue;
      const double a = p[i];
      const double b = p[i | mask];
      p[i] = (1.0 - f) * a + f * b;
      p[i | mask] = f * a + (1.0 - f) * b;
    }
  }
  return p;
}

Counts sample_shots(const StateVector& state, const TomographyConfig& cfg, const NoiseModel& noise) {
  noise.validate();
  if (cfg.analytic()) throw DomainError("sample_shots: shots must be >= 1");
  const auto amps = state.amps();
  Vec cumulative(amps.size());
  double total = 0.0;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    total += amps[i] * amps[i];
    cumulative[i] = total;
  }
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> uniform(0.0, total);
  std::bernoulli_distribution flip(noise.bitflip_p);
  std::vector<std::uint64_t> tally(amps.size(), 0);
  const int n = state.n_qubits();
  for (std::uint64_t shot = 0; shot < cfg.shots; ++shot) {
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), uniform(rng));
    std::size_t outcome = std::min<std::size_t>(std::distance(cumulative.begin(), it), amps.size() - 1);
    if (noise.bitflip_p > 0.0) {
      for (int q = 0; q < n; ++q)
        if (flip(rng)) outcome ^= std::size_t{1} << q;
    }
    ++tally[outcome];
  }
  Counts counts;
  for (std::size_t i = 0; i < tally.size(); ++i)
    if (tally[i]) counts.emplace(bitstring(i, n), tally[i]);
  return counts;
}

MitigationResult mitigate_unary(const Counts& counts, std::span<const int> register_qubits) {
  MitigationResult out;
  std::uint64_t total = 0;
  std::uint64_t kept = 0;
  for (const auto& [bits, count] : counts) {
    total += count;
    int weight = 0;
    if (register_qubits.empty()) {
      weight = static_cast<int>(std::count(bits.begin(), bits.end(), '1'));
    } else {
      for (int q : register_qubits) {
        if (q < 0 || static_cast<std::size_t>(q) >= bits.size()) throw DomainError("mitigate_unary: bad register qubit");
        weight += bits[q] == '1';
      }
    }
    if (weight == 1) {
      out.kept.emplace(bits, count);
      kept += count;
    }
  }
  if (kept == 0) throw DomainError("mitigate_unary: every shot was discarded; the run is unusable");
  out.discard_fraction = static_cast<double>(total - kept) / static_cast<double>(total);
  return out;
}

UnarySubmatrix unary_submatrix(const PyramidLayer& layer) {
  const int n = layer.n_in();
  if (n > 12) throw DomainError("unary_submatrix: n_in " + std::to_string(n) + " exceeds the cap of 12");
  UnarySubmatrix out{Mat(layer.n_out(), n), 0.0};
  for (int j = 0; j < n; ++j) {
    StateVector state(n);
    apply_x(state, j);
    apply_pyramid(state, layer);
    const Vec col = state.unary_amplitudes(layer.n_out());
    for (int i = 0; i < layer.n_out(); ++i) out.matrix(i, j) = col[i];
    out.leakage = std::max(out.leakage, state.non_unary_amplitude());
  }
  return out;
}

}  // namespace pyramidnet::qsim
