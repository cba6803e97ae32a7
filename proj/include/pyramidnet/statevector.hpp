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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pyramidnet/linalg.hpp"
#include "pyramidnet/pyramid.hpp"

namespace pyramidnet::qsim {

// Qubit q is bit q of a basis index. Bitstrings print qubit 0 first, so the
// unary state e_0 on three qubits is "100".

/// Real statevector over n <= 16 qubits, initialised to |0...0>.
class StateVector {
 public:
  static constexpr int kMaxQubits = 16;

  explicit StateVector(int n_qubits);

  int n_qubits() const { return n_qubits_; }
  std::size_t dimension() const { return amps_.size(); }
  std::span<const double> amps() const { return amps_; }
  std::span<double> amps() { return amps_; }

  double norm() const { return norm2(amps_); }
  bool is_ground(double tol = 1e-12) const;

  /// Amplitudes on e_0 .. e_{count-1}.
  Vec unary_amplitudes(int count) const;
  /// Largest |amplitude| on a basis state whose Hamming weight is not 1.
  double non_unary_amplitude() const;

 private:
  int n_qubits_;
  Vec amps_;
};

constexpr std::uint64_t unary_index(int wire) { return std::uint64_t{1} << wire; }

void apply_x(StateVector& state, int qubit);
void apply_h(StateVector& state, int qubit);
void apply_cnot(StateVector& state, int control, int target);

/// RBS(theta) on qubits (i, j), in the basis order |q_i q_j>:
///   |10> -> cos t |10> + sin t |01>,   |01> -> cos t |01> - sin t |10>,
/// identity on |00> and |11>. Throws DomainError for bad wires.
void apply_rbs(StateVector& state, int i, int j, double theta);

/// Applies every gate of the layer on wires first_wire .. first_wire+n_in-1.
/// A slot on wire w is RBS(theta) on (w+1, w), which acts on the unary
/// amplitudes exactly like the classical rotation block.
void apply_pyramid(StateVector& state, const PyramidLayer& layer, int first_wire = 0);

struct LoaderAngles {
  Vec alphas;  // n - 1 angles
};

/// alpha_0 = arccos(x_0), alpha_k = arccos(x_k / prod_{j<k} sin alpha_j).
/// Once the running product drops below 1e-12 the remaining angles are 0.
/// The last angle carries the sign of x_{n-1}; all others lie in [0, pi].
/// Throws DomainError when |x| deviates from 1 by more than 1e-9.
LoaderAngles load_angles(std::span<const double> x);

/// RBS cascade on (k, k+1), k = 0..n-2, without the initial X gate.
void apply_loader_cascade(StateVector& state, const LoaderAngles& loader, int first_wire = 0,
                          bool adjoint = false);
/// X on first_wire, then the cascade. Requires the ground state.
void apply_loader(StateVector& state, const LoaderAngles& loader, int first_wire = 0);

struct NoiseModel {
  double bitflip_p = 0.0;  // per measured bit, in [0, 1)
  void validate() const;
};

struct TomographyConfig {
  static constexpr std::uint64_t kAnalytic = 0;
  std::uint64_t shots = kAnalytic;  // kAnalytic: exact outcome probabilities
  std::uint64_t seed = 1;
  double delta = 0.05;  // target l-infinity precision, informational
  bool mitigate = true;  // post-select unary outcomes before estimating

  bool analytic() const { return shots == kAnalytic; }
};

using Counts = std::map<std::string, std::uint64_t>;

std::string bitstring(std::uint64_t index, int n_qubits);
std::uint64_t parse_bitstring(const std::string& bits);

/// Exact outcome distribution after independent bit flips on every qubit.
Vec outcome_probabilities(const StateVector& state, const NoiseModel& noise);

/// Draws cfg.shots outcomes from |amps|^2, then flips each measured bit with
/// probability noise.bitflip_p. Deterministic in cfg.seed.
Counts sample_shots(const StateVector& state, const TomographyConfig& cfg, const NoiseModel& noise);

struct MitigationResult {
  Counts kept;
  double discard_fraction = 0.0;
};

/// Keeps outcomes whose Hamming weight over `register_qubits` (all qubits when
/// empty) is exactly one. Throws DomainError when nothing survives.
MitigationResult mitigate_unary(const Counts& counts, std::span<const int> register_qubits = {});

struct UnarySubmatrix {
  Mat matrix;  // n_out x n_in
  double leakage = 0.0;  // largest non-unary amplitude seen
};

/// Simulates each |e_j> through the pyramid (n_in <= 12) and reads the unary
/// amplitudes of the output wires.
UnarySubmatrix unary_submatrix(const PyramidLayer& layer);

}  // namespace pyramidnet::qsim
