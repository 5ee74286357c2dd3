// Copyright 2026 The privrep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PRIVREP_COMMON_HPP_
#define PRIVREP_COMMON_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace privrep {

using Vec = std::vector<double>;

// A single learnt representation. Dimension m is fixed per encoder.
using Representation = Vec;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct EmptyDataset : Error {
  using Error::Error;
};

struct InvalidArgument : Error {
  using Error::Error;
};

struct MissingColumn : Error {
  using Error::Error;
};

struct InvalidGeometry : Error {
  using Error::Error;
};

// Raised when a training loop produces a non-finite loss.
struct DivergenceError : Error {
  using Error::Error;
};

// Probabilities are floored before any log so objectives stay finite.
inline constexpr double kProbFloor = 1e-12;

enum class Exec { Serial, Parallel };

}  // namespace privrep

#endif  // PRIVREP_COMMON_HPP_
