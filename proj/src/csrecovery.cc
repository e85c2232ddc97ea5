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

#include "urnet/csrecovery.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <string>

#include <Eigen/Cholesky>

#include "binary_io.h"

namespace urnet {
namespace {

std::vector<int> grid_starts(int extent, int size, int stride) {
  std::vector<int> starts;
  for (int p = 0; p + size <= extent; p += stride) starts.push_back(p);
  if (starts.back() != extent - size) starts.push_back(extent - size);
  return starts;
}

Vector gaussian_1d(int size, double sigma) {
  Vector w(size);
  const double center = 0.5 * (size - 1);
  for (int i = 0; i < size; ++i) w(i) = std::exp(-0.5 * std::pow((i - center) / sigma, 2));
  return w / w.sum();
}

// Valid 2-D correlation with the separable kernel wr * wc^T.
Matrix filter_valid(const Matrix& img, const Vector& wr, const Vector& wc) {
  const Eigen::Index out_r = img.rows() - wr.size() + 1;
  const Eigen::Index out_c = img.cols() - wc.size() + 1;
  Matrix tmp(out_r, img.cols());
  for (Eigen::Index r = 0; r < out_r; ++r)
    tmp.row(r) = wr.transpose() * img.middleRows(r, wr.size());
  Matrix out(out_r, out_c);
  for (Eigen::Index c = 0; c < out_c; ++c) out.col(c) = tmp.middleCols(c, wc.size()) * wc;
  return out;
}

void check_same_shape(const Matrix& a, const Matrix& b, const char* who) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError(std::string(who) + ": shape mismatch");
  if (a.size() == 0) throw DimensionError(std::string(who) + ": empty input");
}

}  // namespace

SensingProblem sensing_from_matrix(const Matrix& A, std::uint64_t seed) {
  if (A.rows() < 1 || A.rows() > A.cols())
    throw DimensionError("sensing matrix must be m x n with 0 < m <= n");
  SensingProblem p;
  p.A = A;
  p.m = static_cast<int>(A.rows());
  p.n = static_cast<int>(A.cols());
  p.seed = seed;
  const Matrix gram = A * A.transpose();
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) throw DataError("A A^T is numerically singular");
  p.A_pinv = A.transpose() * llt.solve(Matrix::Identity(p.m, p.m));
  const double err = right_inverse_error(p);
  if (!(err <= kRightInverseTol))
    throw DataError("right inverse check failed: ||A A+ - I|| = " + std::to_string(err));
  return p;
}

SensingProblem gen_sensing(int m, int n, std::uint64_t seed) {
  if (m <= 0 || m >= n) throw ConfigError("gen_sensing: need 0 < m < n");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(m)));
  Matrix A(m, n);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < n; ++c) A(r, c) = normal(rng);
  return sensing_from_matrix(A, seed);
}

double right_inverse_error(const SensingProblem& problem) {
  return (problem.A * problem.A_pinv - Matrix::Identity(problem.m, problem.m)).norm();
}

TrainingData build_training(const Matrix& signals, const SensingProblem& problem) {
  if (signals.rows() != problem.n) throw DimensionError("build_training: signal length != n");
  const Matrix Y = problem.A * signals;
  return {problem.A_pinv * Y, signals};
}

Vector recover(const NetworkParams& net, const SensingProblem& problem, const Vector& y) {
  if (y.size() != problem.m) throw DimensionError("recover: measurement length != m");
  return forward(net, Vector(problem.A_pinv * y));
}

Matrix recover(const NetworkParams& net, const SensingProblem& problem, const Matrix& Y) {
  if (Y.rows() != problem.m) throw DimensionError("recover: measurement length != m");
  return forward(net, Matrix(problem.A_pinv * Y));
}

void save_sensing(const SensingProblem& problem, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out.write("URSM", 4);
  internal::write_u32_le(out, static_cast<std::uint32_t>(problem.m));
  internal::write_u32_le(out, static_cast<std::uint32_t>(problem.n));
  internal::write_u64_le(out, problem.seed);
  internal::write_matrix_le(out, problem.A);
  if (!out) throw DataError("write failed: " + path.string());
}

SensingProblem load_sensing(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open sensing file " + path.string());
  const std::string what = "sensing file " + path.string();
  internal::expect_magic(in, "URSM", what);
  const std::uint32_t m = internal::read_u32_le(in, what);
  const std::uint32_t n = internal::read_u32_le(in, what);
  const std::uint64_t seed = internal::read_u64_le(in, what);
  if (m == 0 || m > n || n > (1u << 24)) throw DataError("bad dimensions in " + what);
  Matrix A(m, n);
  internal::read_matrix_le(in, A, what);
  if (in.peek() != std::char_traits<char>::eof()) throw DataError("trailing bytes in " + what);
  return sensing_from_matrix(A, seed);
}

double mse(const Matrix& x, const Matrix& x_hat) {
  check_same_shape(x, x_hat, "mse");
  return (x - x_hat).squaredNorm() / static_cast<double>(x.size());
}

double psnr(const Matrix& x, const Matrix& x_hat, double peak) {
  if (!(peak > 0.0)) throw std::invalid_argument("psnr: peak must be positive");
  const double e = mse(x, x_hat);
  if (e == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / e);
}

double ssim(const Matrix& x, const Matrix& x_hat, double peak, const SsimWindow& window) {
  check_same_shape(x, x_hat, "ssim");
  if (!(peak > 0.0)) throw std::invalid_argument("ssim: peak must be positive");
  if (window.size < 1 || !(window.sigma > 0.0)) throw std::invalid_argument("ssim: bad window");
  const Vector wr = gaussian_1d(std::min<int>(window.size, static_cast<int>(x.rows())), window.sigma);
  const Vector wc = gaussian_1d(std::min<int>(window.size, static_cast<int>(x.cols())), window.sigma);
  const double c1 = std::pow(window.k1 * peak, 2);
  const double c2 = std::pow(window.k2 * peak, 2);

  using Array = Eigen::ArrayXXd;
  const Array m1 = filter_valid(x, wr, wc).array();
  const Array m2 = filter_valid(x_hat, wr, wc).array();
  const Array s11 = filter_valid(x.cwiseProduct(x), wr, wc).array() - m1.square();
  const Array s22 = filter_valid(x_hat.cwiseProduct(x_hat), wr, wc).array() - m2.square();
  const Array s12 = filter_valid(x.cwiseProduct(x_hat), wr, wc).array() - m1 * m2;
  const Array map = ((2.0 * m1 * m2 + c1) * (2.0 * s12 + c2)) /
                    ((m1.square() + m2.square() + c1) * (s11 + s22 + c2));
  return map.mean();
}

PatchGeometry patch_geometry(int rows, int cols, int size, int stride) {
  if (size < 1 || stride < 1) throw std::invalid_argument("patch size and stride must be positive");
  if (rows < size || cols < size)
    throw DimensionError("image " + std::to_string(rows) + "x" + std::to_string(cols) +
                         " is smaller than the patch size " + std::to_string(size));
  PatchGeometry g;
  g.rows = rows;
  g.cols = cols;
  g.size = size;
  g.stride = stride;
  g.row_starts = grid_starts(rows, size, stride);
  g.col_starts = grid_starts(cols, size, stride);
  return g;
}

Matrix extract_patches(const Matrix& image, const PatchGeometry& g) {
  if (image.rows() != g.rows || image.cols() != g.cols)
    throw DimensionError("extract_patches: image does not match geometry");
  Matrix patches(static_cast<Eigen::Index>(g.size) * g.size, static_cast<Eigen::Index>(g.count()));
  Eigen::Index k = 0;
  for (int r0 : g.row_starts) {
    for (int c0 : g.col_starts) {
      for (int r = 0; r < g.size; ++r)
        patches.col(k).segment(static_cast<Eigen::Index>(r) * g.size, g.size) =
            image.block(r0 + r, c0, 1, g.size).transpose();
      ++k;
    }
  }
  return patches;
}

Matrix extract_patches(const Matrix& image, int size, int stride) {
  return extract_patches(image, patch_geometry(static_cast<int>(image.rows()),
                                               static_cast<int>(image.cols()), size, stride));
}

Matrix reconstruct_average(const Matrix& patches, const PatchGeometry& g) {
  if (patches.rows() != static_cast<Eigen::Index>(g.size) * g.size ||
      patches.cols() != static_cast<Eigen::Index>(g.count()))
    throw DimensionError("reconstruct_average: patches do not match geometry");
  Matrix sum = Matrix::Zero(g.rows, g.cols);
  Matrix hits = Matrix::Zero(g.rows, g.cols);
  Eigen::Index k = 0;
  for (int r0 : g.row_starts) {
    for (int c0 : g.col_starts) {
      for (int r = 0; r < g.size; ++r)
        sum.block(r0 + r, c0, 1, g.size) +=
            patches.col(k).segment(static_cast<Eigen::Index>(r) * g.size, g.size).transpose();
      hits.block(r0, c0, g.size, g.size).array() += 1.0;
      ++k;
    }
  }
  return sum.cwiseQuotient(hits);
}

}  // namespace urnet
