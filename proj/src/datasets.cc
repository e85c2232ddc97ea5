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

#include "urnet/datasets.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "binary_io.h"

namespace urnet {
namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

std::ifstream open_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

// Next whitespace-delimited PGM header token, skipping '#' comments.
std::string pgm_token(std::istream& in, const std::string& what) {
  std::string token;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!token.empty()) return token;
      continue;
    }
    token.push_back(static_cast<char>(ch));
  }
  if (token.empty()) throw DataError("malformed PGM header in " + what);
  return token;
}

int pgm_int(std::istream& in, const std::string& what) {
  const std::string tok = pgm_token(in, what);
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(c); }) ||
      tok.size() > 9)
    throw DataError("malformed PGM header in " + what + ": '" + tok + "'");
  return std::stoi(tok);
}

}  // namespace

Dataset load_mnist_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  const std::string img_what = "IDX images " + images.string();
  const std::string lbl_what = "IDX labels " + labels.string();
  std::ifstream img = open_binary(images);
  std::ifstream lbl = open_binary(labels);

  if (internal::read_u32_be(img, img_what) != kIdxImagesMagic)
    throw DataError("bad magic in " + img_what);
  if (internal::read_u32_be(lbl, lbl_what) != kIdxLabelsMagic)
    throw DataError("bad magic in " + lbl_what);
  const std::uint32_t count = internal::read_u32_be(img, img_what);
  const std::uint32_t rows = internal::read_u32_be(img, img_what);
  const std::uint32_t cols = internal::read_u32_be(img, img_what);
  const std::uint32_t label_count = internal::read_u32_be(lbl, lbl_what);
  if (count != label_count)
    throw DataError("count mismatch: " + std::to_string(count) + " images vs " +
                    std::to_string(label_count) + " labels");
  if (count == 0 || rows == 0 || cols == 0 || rows > 4096 || cols > 4096)
    throw DataError("bad dimensions in " + img_what);

  const std::size_t dim = static_cast<std::size_t>(rows) * cols;
  std::vector<unsigned char> pixels(dim * count);
  internal::read_exact(img, pixels.data(), pixels.size(), img_what);
  std::vector<unsigned char> raw_labels(count);
  internal::read_exact(lbl, raw_labels.data(), raw_labels.size(), lbl_what);

  Dataset ds;
  ds.samples.resize(static_cast<Eigen::Index>(dim), count);
  for (std::uint32_t j = 0; j < count; ++j)
    for (std::size_t i = 0; i < dim; ++i) ds.samples(i, j) = pixels[j * dim + i] / 255.0;
  ds.labels.assign(raw_labels.begin(), raw_labels.end());
  ds.provenance = "mnist:" + images.filename().string();
  return ds;
}

Matrix load_grayscale_image(const std::filesystem::path& path) {
  const std::string what = "PGM " + path.string();
  std::ifstream in = open_binary(path);
  if (pgm_token(in, what) != "P5") throw DataError("unsupported image format in " + what + " (need P5)");
  const int width = pgm_int(in, what);
  const int height = pgm_int(in, what);
  const int maxval = pgm_int(in, what);
  if (width <= 0 || height <= 0) throw DataError("bad dimensions in " + what);
  if (maxval != 255) throw DataError("unsupported maxval in " + what + " (need 255)");

  std::vector<unsigned char> bytes(static_cast<std::size_t>(width) * height);
  internal::read_exact(in, bytes.data(), bytes.size(), what);
  Matrix image(height, width);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c)
      image(r, c) = bytes[static_cast<std::size_t>(r) * width + c] / 255.0;
  return image;
}

void write_pgm(const Matrix& image, const std::filesystem::path& path) {
  if (image.size() == 0) throw DimensionError("write_pgm: empty image");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << "P5\n" << image.cols() << ' ' << image.rows() << "\n255\n";
  for (Eigen::Index r = 0; r < image.rows(); ++r) {
    for (Eigen::Index c = 0; c < image.cols(); ++c) {
      const double v = std::clamp(image(r, c), 0.0, 1.0);
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
    }
  }
  if (!out) throw DataError("write failed: " + path.string());
}

Dataset gen_sparse(int n, int k, int count, std::uint64_t seed) {
  if (n <= 0 || count <= 0) throw ConfigError("gen_sparse: n and N must be positive");
  if (k <= 0 || k > n) throw ConfigError("gen_sparse: need 0 < k <= n");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> magnitude(0.2, 1.0);
  std::vector<int> positions(static_cast<std::size_t>(n));
  Dataset ds;
  ds.samples = Matrix::Zero(n, count);
  for (int j = 0; j < count; ++j) {
    std::iota(positions.begin(), positions.end(), 0);
    // Partial Fisher-Yates: the first k entries are a uniform k-subset.
    for (int i = 0; i < k; ++i) {
      std::uniform_int_distribution<int> pick(i, n - 1);
      std::swap(positions[i], positions[pick(rng)]);
      ds.samples(positions[i], j) = magnitude(rng);
    }
  }
  ds.provenance = "sparse:n=" + std::to_string(n) + ",k=" + std::to_string(k) +
                  ",N=" + std::to_string(count) + ",seed=" + std::to_string(seed);
  return ds;
}

}  // namespace urnet
