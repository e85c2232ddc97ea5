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

#ifndef URNET_MODEL_H_
#define URNET_MODEL_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "urnet/types.h"

namespace urnet {

// An L-layer ReLU network
//
//   M_L x = W_L relu(W_{L-1} ... relu(W_1 x + b_1) ... + b_{L-1}) + b_L.
//
// Layers are numbered 1..L in the public API; weights[l - 1] holds W_l, of
// shape N_l x N_{l-1}.
struct NetworkParams {
  std::vector<int> layer_dims;  // N_0 ... N_L
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  int num_layers() const { return static_cast<int>(weights.size()); }
  int input_dim() const { return layer_dims.front(); }
  int output_dim() const { return layer_dims.back(); }

  const Matrix& W(int layer) const { return weights[layer - 1]; }
  Matrix& W(int layer) { return weights[layer - 1]; }
  const Vector& b(int layer) const { return biases[layer - 1]; }
  Vector& b(int layer) { return biases[layer - 1]; }
};

// Throws DimensionError unless the shape chain and finiteness invariants hold.
void validate(const NetworkParams& net);

// Zero weights and biases with the given shape chain.
NetworkParams zero_network(const std::vector<int>& layer_dims);

Vector relu(const Vector& x);
Matrix relu(const Matrix& x);

Vector forward(const NetworkParams& net, const Vector& x);
// Column-wise forward pass over a batch.
Matrix forward(const NetworkParams& net, const Matrix& x);

// Weights i.i.d. N(0, sigma^2), biases zero. Deterministic in `seed`.
NetworkParams init_gaussian(const std::vector<int>& layer_dims, double sigma,
                            std::uint64_t seed);

// Checkpoint container, little-endian:
//   "URNW" | u32 version | u32 L | u32 N_0..N_L | W_l row-major f64 ... |
//   b_l f64 ...
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const NetworkParams& net, const std::filesystem::path& path);
NetworkParams load_checkpoint(const std::filesystem::path& path);

}  // namespace urnet

#endif  // URNET_MODEL_H_
