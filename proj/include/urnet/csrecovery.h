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

#ifndef URNET_CSRECOVERY_H_
#define URNET_CSRECOVERY_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "urnet/model.h"

namespace urnet {

struct SensingProblem {
  Matrix A;       // m x n
  Matrix A_pinv;  // n x m right inverse, A * A_pinv = I_m
  int m = 0;
  int n = 0;
  std::uint64_t seed = 0;
};

// Tolerance on ||A A_pinv - I||_F enforced whenever a problem is built or loaded.
inline constexpr double kRightInverseTol = 1e-8;

// A_ij ~ N(0, 1/m), A_pinv = A^T (A A^T)^{-1}. Requires 0 < m < n.
SensingProblem gen_sensing(int m, int n, std::uint64_t seed);

// Wraps an existing m x n matrix (m <= n). Throws DataError if A A^T is
// singular or the right-inverse check fails.
SensingProblem sensing_from_matrix(const Matrix& A, std::uint64_t seed = 0);

double right_inverse_error(const SensingProblem& problem);

// Pairs (A_pinv A X, X) for the signals stored as columns of X.
TrainingData build_training(const Matrix& signals, const SensingProblem& problem);

Vector recover(const NetworkParams& net, const SensingProblem& problem, const Vector& y);
Matrix recover(const NetworkParams& net, const SensingProblem& problem, const Matrix& Y);

// "URSM" | u32 m | u32 n | u64 seed | A row-major f64. A_pinv is rebuilt on load.
void save_sensing(const SensingProblem& problem, const std::filesystem::path& path);
SensingProblem load_sensing(const std::filesystem::path& path);

double mse(const Matrix& x, const Matrix& x_hat);
// +infinity when the images are identical.
double psnr(const Matrix& x, const Matrix& x_hat, double peak = 1.0);

struct SsimWindow {
  int size = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

// Mean SSIM over all valid window placements on 2-D images. The window is
// shrunk per axis to the image size when the image is smaller than it.
double ssim(const Matrix& x, const Matrix& x_hat, double peak = 1.0, const SsimWindow& window = {});

struct PatchGeometry {
  int rows = 0;
  int cols = 0;
  int size = 32;
  int stride = 4;
  std::vector<int> row_starts;
  std::vector<int> col_starts;

  std::size_t count() const { return row_starts.size() * col_starts.size(); }
};

// Grid anchored at (0, 0) with the given stride, plus one patch flush to the
// bottom/right border when the stride does not land there.
PatchGeometry patch_geometry(int rows, int cols, int size = 32, int stride = 4);

// Patches in row-major scan order, each flattened row-major into one column.
Matrix extract_patches(const Matrix& image, const PatchGeometry& geometry);
Matrix extract_patches(const Matrix& image, int size = 32, int stride = 4);

// Averages every pixel over all patches covering it.
Matrix reconstruct_average(const Matrix& patches, const PatchGeometry& geometry);

}  // namespace urnet

#endif  // URNET_CSRECOVERY_H_
