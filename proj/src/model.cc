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

#include "urnet/model.h"

#include <cmath>
#include <fstream>
#include <random>
#include <string>

#include "binary_io.h"

namespace urnet {

void validate(const NetworkParams& net) {
  const int L = net.num_layers();
  if (L < 2) throw DimensionError("network needs at least 2 layers");
  if (net.biases.size() != net.weights.size())
    throw DimensionError("weights/biases count mismatch");
  if (static_cast<int>(net.layer_dims.size()) != L + 1)
    throw DimensionError("layer_dims must have L + 1 entries");
  for (int l = 1; l <= L; ++l) {
    const Matrix& W = net.W(l);
    if (W.rows() != net.layer_dims[l] || W.cols() != net.layer_dims[l - 1])
      throw DimensionError("W_" + std::to_string(l) + " has wrong shape");
    if (net.b(l).size() != net.layer_dims[l])
      throw DimensionError("b_" + std::to_string(l) + " has wrong length");
    if (!W.allFinite() || !net.b(l).allFinite())
      throw DimensionError("layer " + std::to_string(l) + " has non-finite entries");
  }
}

NetworkParams zero_network(const std::vector<int>& layer_dims) {
  if (layer_dims.size() < 3) throw DimensionError("network needs at least 2 layers");
  for (int d : layer_dims)
    if (d <= 0) throw DimensionError("layer dimensions must be positive");
  NetworkParams net;
  net.layer_dims = layer_dims;
  for (std::size_t l = 1; l < layer_dims.size(); ++l) {
    net.weights.push_back(Matrix::Zero(layer_dims[l], layer_dims[l - 1]));
    net.biases.push_back(Vector::Zero(layer_dims[l]));
  }
  return net;
}

Vector relu(const Vector& x) { return x.cwiseMax(0.0); }

Matrix relu(const Matrix& x) { return x.cwiseMax(0.0); }

Vector forward(const NetworkParams& net, const Vector& x) {
  if (x.size() != net.input_dim()) throw DimensionError("forward: input length mismatch");
  const int L = net.num_layers();
  Vector h = x;
  for (int l = 1; l < L; ++l) h = relu(Vector(net.W(l) * h + net.b(l)));
  return net.W(L) * h + net.b(L);
}

Matrix forward(const NetworkParams& net, const Matrix& x) {
  if (x.rows() != net.input_dim()) throw DimensionError("forward: input rows mismatch");
  const int L = net.num_layers();
  Matrix h = x;
  for (int l = 1; l < L; ++l) {
    Matrix pre = net.W(l) * h;
    pre.colwise() += net.b(l);
    h = relu(pre);
  }
  Matrix out = net.W(L) * h;
  out.colwise() += net.b(L);
  return out;
}

NetworkParams init_gaussian(const std::vector<int>& layer_dims, double sigma,
                            std::uint64_t seed) {
  if (!(sigma > 0.0)) throw std::invalid_argument("init_gaussian: sigma must be positive");
  NetworkParams net = zero_network(layer_dims);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  for (Matrix& W : net.weights)
    for (Eigen::Index c = 0; c < W.cols(); ++c)
      for (Eigen::Index r = 0; r < W.rows(); ++r) W(r, c) = normal(rng);
  return net;
}

void save_checkpoint(const NetworkParams& net, const std::filesystem::path& path) {
  validate(net);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out.write("URNW", 4);
  internal::write_u32_le(out, kCheckpointVersion);
  internal::write_u32_le(out, static_cast<std::uint32_t>(net.num_layers()));
  for (int d : net.layer_dims) internal::write_u32_le(out, static_cast<std::uint32_t>(d));
  for (const Matrix& W : net.weights) internal::write_matrix_le(out, W);
  for (const Vector& b : net.biases) internal::write_matrix_le(out, b);
  if (!out) throw DataError("write failed for " + path.string());
}

NetworkParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  const std::string what = "checkpoint " + path.string();
  internal::expect_magic(in, "URNW", what);
  const std::uint32_t version = internal::read_u32_le(in, what);
  if (version != kCheckpointVersion)
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  const std::uint32_t L = internal::read_u32_le(in, what);
  if (L < 2 || L > 4096) throw DataError("implausible layer count in " + what);
  std::vector<int> dims(L + 1);
  for (auto& d : dims) {
    d = static_cast<int>(internal::read_u32_le(in, what));
    if (d <= 0) throw DataError("zero layer width in " + what);
  }
  NetworkParams net = zero_network(dims);
  for (Matrix& W : net.weights) internal::read_matrix_le(in, W, what);
  for (Vector& b : net.biases) {
    Matrix tmp(b.size(), 1);
    internal::read_matrix_le(in, tmp, what);
    b = tmp.col(0);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw DataError("trailing bytes in " + what);
  validate(net);
  return net;
}

}  // namespace urnet
