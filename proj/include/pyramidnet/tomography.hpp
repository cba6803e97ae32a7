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

#include <span>
#include <string_view>
#include <vector>

#include "pyramidnet/network.hpp"
#include "pyramidnet/statevector.hpp"

namespace pyramidnet::qsim {

/// Raised when sign links cannot be resolved (no counts on a comparator pair).
class TomographyError : public Error {
 public:
  TomographyError(const std::string& what, std::vector<int> indices)
      : Error(what), indices_(std::move(indices)) {}
  const std::vector<int>& unresolved_indices() const { return indices_; }

 private:
  std::vector<int> indices_;
};

struct TomographyResult {
  Vec estimate;                   // signed estimate of the layer output
  double discard_fraction = 0.0;  // largest over the circuits that were run
};

/// Three-circuit sign retrieval: magnitudes from the plain circuit, then
/// pi/4 comparators on pairs (0,1),(2,3),... and (1,2),(3,4),...; signs are
/// chained from the convention y_0 >= 0, so the result is exact only up to a
/// global sign.
TomographyResult tomography_pairwise(const PyramidLayer& layer, std::span<const double> x,
                                     const TomographyConfig& cfg, const NoiseModel& noise);

/// One-circuit sign retrieval with an ancilla (last qubit). The output is
/// compared against the uniform vector 1/sqrt(n) loaded on the other branch:
/// Pr[0,e_j] - Pr[1,e_j] = y_j / sqrt(n). Rectangular layers load the uniform
/// vector on all n_in wires and keep the first n_out components.
TomographyResult tomography_ancilla(const PyramidLayer& layer, std::span<const double> x,
                                    const TomographyConfig& cfg, const NoiseModel& noise);

enum class Procedure { kPairwise, kAncilla };
std::string_view to_string(Procedure p);
Procedure parse_procedure(std::string_view name);

/// Layer-by-layer hybrid inference: normalise, tomography, rescale, add bias
/// and apply the activation classically, reload. Layer l uses seed cfg.seed + l.
Vec multilayer_quantum_inference(const Network& net, std::span<const double> x, const TomographyConfig& cfg,
                                 const NoiseModel& noise, Procedure procedure = Procedure::kAncilla);

}  // namespace pyramidnet::qsim
