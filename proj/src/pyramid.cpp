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

#include "pyramidnet/pyramid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <tuple>

namespace pyramidnet {

PyramidSchedule PyramidSchedule::build(int n_in, int n_out) {
  if (n_in < 2) throw DomainError("build_schedule: n_in must be >= 2, got " + std::to_string(n_in));
  if (n_out < 1 || n_out > n_in) {
    throw DomainError("build_schedule: n_out must be in [1, n_in], got n_in=" +
                      std::to_string(n_in) + " n_out=" + std::to_string(n_out));
  }
  const int n = n_in;
  std::vector<GateSlot> square;
  for (int t = 0; t <= 2 * n - 4; ++t) {
    for (int i = std::abs(t - (n - 2)); i <= n - 2; i += 2) square.push_back({t, i});
  }

  PyramidSchedule s;
  s.n_in_ = n_in;
  s.n_out_ = n_out;
  if (n_out == n_in) {
    s.slots_ = std::move(square);
  } else {
    std::vector<bool> live(n, false);
    for (int w = 0; w < n_out; ++w) live[w] = true;
    for (auto it = square.rbegin(); it != square.rend(); ++it) {
      if (live[it->wire] || live[it->wire + 1]) {
        s.slots_.push_back(*it);
        live[it->wire] = live[it->wire + 1] = true;
      }
    }
    std::reverse(s.slots_.begin(), s.slots_.end());
  }

  const int timesteps = s.slots_.empty() ? 0 : s.slots_.back().timestep + 1;
  s.timestep_offsets_.assign(timesteps + 1, 0);
  for (const GateSlot& g : s.slots_) ++s.timestep_offsets_[g.timestep + 1];
  for (int t = 0; t < timesteps; ++t) s.timestep_offsets_[t + 1] += s.timestep_offsets_[t];
  return s;
}

std::optional<std::size_t> PyramidSchedule::find(int timestep, int wire) const {
  if (timestep < 0 || timestep >= timesteps()) return std::nullopt;
  auto [first, last] = timestep_range(timestep);
  for (std::size_t k = first; k < last; ++k)
    if (slots_[k].wire == wire) return k;
  return std::nullopt;
}

double canonical_angle(double theta) {
  constexpr double kPi = std::numbers::pi;
  if (theta > -kPi && theta <= kPi) return theta;
  double r = std::remainder(theta, 2.0 * kPi);  // [-pi, pi]
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

PyramidLayer::PyramidLayer(int n_in, int n_out)
    : schedule_(PyramidSchedule::build(n_in, n_out)), angles_(schedule_.size(), 0.0) {}

PyramidLayer::PyramidLayer(PyramidSchedule schedule, Vec angles)
    : schedule_(std::move(schedule)), angles_(std::move(angles)) {
  if (angles_.size() != schedule_.size()) {
    throw DimensionError("PyramidLayer: " + std::to_string(angles_.size()) + " angles for " +
                         std::to_string(schedule_.size()) + " slots");
  }
  if (!all_finite(angles_)) throw DomainError("PyramidLayer: non-finite angle");
  for (double& a : angles_) a = canonical_angle(a);
}

PyramidLayer PyramidLayer::random(int n_in, int n_out, std::mt19937_64& rng) {
  auto schedule = PyramidSchedule::build(n_in, n_out);
  std::uniform_real_distribution<double> dist(-std::numbers::pi, std::numbers::pi);
  Vec angles(schedule.size());
  for (double& a : angles) a = dist(rng);
  return PyramidLayer(std::move(schedule), std::move(angles));
}

void PyramidLayer::set_angle(std::size_t slot, double theta) {
  angles_.at(slot) = canonical_angle(theta);
}

ForwardResult forward(const PyramidLayer& layer, std::span<const double> x, bool keep_trace) {
  const auto& schedule = layer.schedule();
  if (x.size() != static_cast<std::size_t>(schedule.n_in())) {
    throw DimensionError("forward: input length " + std::to_string(x.size()) + ", layer expects " +
                         std::to_string(schedule.n_in()));
  }
  ForwardResult out;
  Vec zeta(x.begin(), x.end());
  if (keep_trace) {
    out.trace.emplace();
    out.trace->inner_layers.reserve(schedule.timesteps() + 1);
  }
  const auto slots = schedule.slots();
  for (int t = 0; t < schedule.timesteps(); ++t) {
    if (keep_trace) out.trace->inner_layers.push_back(zeta);
    auto [first, last] = schedule.timestep_range(t);
    for (std::size_t k = first; k < last; ++k) {
      const int i = slots[k].wire;
      std::tie(zeta[i], zeta[i + 1]) = apply_rotation_pair(layer.angle(k), zeta[i], zeta[i + 1]);
    }
    out.gate_visits += last - first;
  }
  if (keep_trace) out.trace->inner_layers.push_back(zeta);
  zeta.resize(schedule.n_out());
  out.y = std::move(zeta);
  return out;
}

Mat matrix_from_angles(const PyramidLayer& layer) {
  const int n_in = layer.n_in();
  Mat w(layer.n_out(), n_in);
  Vec e(n_in, 0.0);
  for (int j = 0; j < n_in; ++j) {
    e[j] = 1.0;
    const Vec col = forward(layer, e).y;
    e[j] = 0.0;
    for (int i = 0; i < layer.n_out(); ++i) w(i, j) = col[i];
  }
  return w;
}

AngleDecomposition angles_from_matrix(const Mat& w) {
  if (!w.square() || w.rows() < 2) throw DimensionError("angles_from_matrix: need a square matrix, n >= 2");
  const double deviation = orthogonality_deviation(w);
  if (!(deviation <= 1e-8)) throw NotOrthogonalError(deviation);

  const int n = static_cast<int>(w.rows());
  AngleDecomposition out;
  Mat m = w;
  if (determinant(w) < 0.0) {
    for (double& v : m.row(n - 1)) v = -v;
    out.flipped_outputs.push_back(n - 1);
  }

  auto schedule = PyramidSchedule::build(n, n);
  Vec angles(schedule.size(), 0.0);
  // Column-major elimination; for gates sharing a wire this visits them in
  // decreasing timestep order, so it peels the circuit from the end.
  for (int k = 0; k + 1 < n; ++k) {
    for (int i = n - 2; i >= k; --i) {
      const int t = i + n - 2 - 2 * k;
      const auto slot = schedule.find(t, i);
      if (!slot) throw Error("angles_from_matrix: schedule has no slot at (" + std::to_string(t) + "," +
                             std::to_string(i) + ")");
      const double a = m(i, k);
      const double b = m(i + 1, k);
      const double theta = (a == 0.0 && b == 0.0) ? 0.0 : std::atan2(-b, a);
      const double c = std::cos(theta);
      const double s = std::sin(theta);
      auto ri = m.row(i);
      auto rj = m.row(i + 1);
      for (int col = 0; col < n; ++col) {
        const double u = ri[col];
        const double v = rj[col];
        ri[col] = c * u - s * v;
        rj[col] = s * u + c * v;
      }
      angles[*slot] = theta;
    }
  }
  out.layer = PyramidLayer(std::move(schedule), std::move(angles));
  return out;
}

void export_matrix_csv(const Mat& m, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw Error("export_matrix_csv: cannot open " + path.string());
  f.precision(17);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) f << ',';
      f << m(r, c);
    }
    f << '\n';
  }
  if (!f) throw Error("export_matrix_csv: write failed for " + path.string());
}

Mat import_matrix_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error("import_matrix_csv: cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw DomainError("import_matrix_csv: bad number '" + cell + "' in " + path.string());
      }
    }
    rows.push_back(std::move(row));
  }
  return Mat::from_rows(rows);
}

}  // namespace pyramidnet
