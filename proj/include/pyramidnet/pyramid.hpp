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

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "pyramidnet/linalg.hpp"

namespace pyramidnet {

// Gate convention: a slot on wire i rotates the pair (i, i+1) by the block
// [[cos t, sin t], [-sin t, cos t]], i.e. (u, v) -> (c u + s v, -s u + c v).
// Every layer is a product of such blocks, so its matrix is in SO(n) (square)
// or has orthonormal rows (rectangular).

struct GateSlot {
  int timestep = 0;
  int wire = 0;  // acts on wires (wire, wire + 1)

  bool operator==(const GateSlot&) const = default;
};

/// Pyramidal gate schedule for an n_in -> n_out layer.
///
/// The square pyramid has its base on the bottom wire pair: slot (t, i)
/// exists iff |t - (n-2)| <= i <= n-2 and i = t + n (mod 2), giving
/// n(n-1)/2 gates over 2n-3 timesteps. A rectangular layer keeps only the
/// gates in the backward light cone of output wires 0..n_out-1, which leaves
/// (2 n_in - 1 - n_out) n_out / 2 gates.
class PyramidSchedule {
 public:
  static PyramidSchedule build(int n_in, int n_out);

  int n_in() const { return n_in_; }
  int n_out() const { return n_out_; }
  bool square() const { return n_in_ == n_out_; }

  /// Slots ordered by timestep, then wire ascending.
  std::span<const GateSlot> slots() const { return slots_; }
  std::size_t size() const { return slots_.size(); }

  /// Number of timesteps (max timestep + 1).
  int timesteps() const { return static_cast<int>(timestep_offsets_.size()) - 1; }
  /// Slot index range [first, last) belonging to `timestep`.
  std::pair<std::size_t, std::size_t> timestep_range(int timestep) const {
    return {timestep_offsets_[timestep], timestep_offsets_[timestep + 1]};
  }

  /// Index of the slot at (timestep, wire), if present.
  std::optional<std::size_t> find(int timestep, int wire) const;

  bool operator==(const PyramidSchedule& other) const {
    return n_in_ == other.n_in_ && n_out_ == other.n_out_;
  }

 private:
  int n_in_ = 0;
  int n_out_ = 0;
  std::vector<GateSlot> slots_;
  std::vector<std::size_t> timestep_offsets_;
};

/// Maps an angle to the canonical range (-pi, pi].
double canonical_angle(double theta);

/// One orthogonal layer: a schedule plus one angle per slot.
class PyramidLayer {
 public:
  PyramidLayer() = default;
  /// Zero angles (identity on the kept wires).
  PyramidLayer(int n_in, int n_out);
  /// Angles in slot order; they are canonicalised.
  PyramidLayer(PyramidSchedule schedule, Vec angles);

  static PyramidLayer random(int n_in, int n_out, std::mt19937_64& rng);

  const PyramidSchedule& schedule() const { return schedule_; }
  int n_in() const { return schedule_.n_in(); }
  int n_out() const { return schedule_.n_out(); }
  std::size_t size() const { return angles_.size(); }

  std::span<const double> angles() const { return angles_; }
  double angle(std::size_t slot) const { return angles_[slot]; }
  /// Sets the angle (canonicalised).
  void set_angle(std::size_t slot, double theta);

 private:
  PyramidSchedule schedule_;
  Vec angles_;
};

/// (cos t u + sin t v, -sin t u + cos t v)
inline std::pair<double, double> apply_rotation_pair(double theta, double u, double v) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {c * u + s * v, -s * u + c * v};
}

/// Inner layers zeta^0 .. zeta^T of one forward pass (T = timestep count).
struct ForwardTrace {
  std::vector<Vec> inner_layers;
};

struct ForwardResult {
  Vec y;
  std::optional<ForwardTrace> trace;
  std::size_t gate_visits = 0;
};

/// Applies the layer timestep by timestep. `y` holds wires 0..n_out-1 of the
/// final inner layer. Throws DimensionError on a length mismatch.
ForwardResult forward(const PyramidLayer& layer, std::span<const double> x, bool keep_trace = false);

/// n_out x n_in matrix W with W x = forward(layer, x).y.
Mat matrix_from_angles(const PyramidLayer& layer);

struct AngleDecomposition {
  PyramidLayer layer;
  /// Output wires whose sign must be flipped after the layer:
  /// w = diag(mask) * matrix_from_angles(layer). Empty when det(w) = +1.
  std::vector<int> flipped_outputs;
};

/// Inverse of matrix_from_angles for square orthogonal matrices.
///
/// Peels gates from the last timestep to the first, choosing at each slot the
/// angle that zeroes the sub-diagonal entry it targets. det = -1 matrices are
/// not reachable with rotations; the last output wire is then reported in
/// `flipped_outputs`. Throws NotOrthogonalError if |w^T w - I| > 1e-8.
AngleDecomposition angles_from_matrix(const Mat& w);

/// Writes one matrix row per line, comma separated, 17 significant digits.
void export_matrix_csv(const Mat& m, const std::filesystem::path& path);
Mat import_matrix_csv(const std::filesystem::path& path);

}  // namespace pyramidnet
