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

#include <stdexcept>
#include <string>

namespace pyramidnet {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree (matrix products, layer chains, traces).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A value is outside the domain an operation accepts.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An iterative method hit its sweep cap before converging.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, int sweeps)
      : Error(what + " (after " + std::to_string(sweeps) + " sweeps)"), sweeps_(sweeps) {}
  int sweeps() const { return sweeps_; }

 private:
  int sweeps_;
};

/// Input matrix deviates from orthogonality by more than the accepted tolerance.
class NotOrthogonalError : public Error {
 public:
  explicit NotOrthogonalError(double deviation)
      : Error("matrix is not orthogonal: max |W^T W - I| = " + std::to_string(deviation)),
        deviation_(deviation) {}
  double deviation() const { return deviation_; }

 private:
  double deviation_;
};

}  // namespace pyramidnet
