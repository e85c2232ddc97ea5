// Copyright 2026 The urnet Authors
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

#ifndef URNET_TYPES_H_
#define URNET_TYPES_H_

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace urnet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Sample-major data sets are stored one sample per column.
struct TrainingData {
  Matrix inputs;   // N_0 x N
  Matrix targets;  // N_L x N

  Eigen::Index size() const { return inputs.cols(); }
};

// Shape or size mismatch between arguments.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or missing input data (files, headers, payloads).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A solver produced a non-finite objective.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace urnet

#endif  // URNET_TYPES_H_
