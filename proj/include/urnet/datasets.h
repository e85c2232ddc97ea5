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

#ifndef URNET_DATASETS_H_
#define URNET_DATASETS_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "urnet/types.h"

namespace urnet {

struct Dataset {
  Matrix samples;           // n x N, one sample per column, values in [0, 1]
  std::vector<int> labels;  // empty when unlabeled
  std::string provenance;

  Eigen::Index size() const { return samples.cols(); }
  Eigen::Index dim() const { return samples.rows(); }
};

// MNIST IDX pair: images (magic 0x00000803) and labels (0x00000801),
// big-endian headers. Pixels are scaled by 1/255 and flattened row-major.
Dataset load_mnist_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

// Binary 8-bit PGM (P5). Returns a rows x cols matrix scaled by 1/255.
Matrix load_grayscale_image(const std::filesystem::path& path);

// Writes `image` as 8-bit P5 after clamping to [0, 1] and rounding.
void write_pgm(const Matrix& image, const std::filesystem::path& path);

// N columns of length n, each with exactly k nonzeros at uniformly drawn
// positions and magnitudes uniform in [0.2, 1].
Dataset gen_sparse(int n, int k, int count, std::uint64_t seed);

}  // namespace urnet

#endif  // URNET_DATASETS_H_
