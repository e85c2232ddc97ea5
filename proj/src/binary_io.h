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

#ifndef URNET_SRC_BINARY_IO_H_
#define URNET_SRC_BINARY_IO_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "urnet/types.h"

namespace urnet::internal {

inline void write_u32_le(std::ostream& out, std::uint32_t value) {
  unsigned char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<unsigned char>(value >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

inline void write_u64_le(std::ostream& out, std::uint64_t value) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(value >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

inline void write_f64_le(std::ostream& out, double value) {
  write_u64_le(out, std::bit_cast<std::uint64_t>(value));
}

inline void read_exact(std::istream& in, void* dst, std::size_t n, const std::string& what) {
  in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw DataError("truncated " + what);
  }
}

inline std::uint32_t read_u32_le(std::istream& in, const std::string& what) {
  unsigned char bytes[4];
  read_exact(in, bytes, 4, what);
  std::uint32_t value = 0;
  for (int i = 0; i < 4; ++i) value |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  return value;
}

inline std::uint32_t read_u32_be(std::istream& in, const std::string& what) {
  unsigned char bytes[4];
  read_exact(in, bytes, 4, what);
  std::uint32_t value = 0;
  for (int i = 0; i < 4; ++i) value = (value << 8) | bytes[i];
  return value;
}

inline std::uint64_t read_u64_le(std::istream& in, const std::string& what) {
  unsigned char bytes[8];
  read_exact(in, bytes, 8, what);
  std::uint64_t value = 0;
  for (int i = 0; i < 8; ++i) value |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return value;
}

inline double read_f64_le(std::istream& in, const std::string& what) {
  return std::bit_cast<double>(read_u64_le(in, what));
}

inline void expect_magic(std::istream& in, const char (&magic)[5], const std::string& what) {
  char got[4];
  read_exact(in, got, 4, what);
  if (std::memcmp(got, magic, 4) != 0) {
    throw DataError("bad magic in " + what + ": expected " + std::string(magic, 4));
  }
}

// Row-major f64 payload.
inline void write_matrix_le(std::ostream& out, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) write_f64_le(out, m(r, c));
}

inline void read_matrix_le(std::istream& in, Matrix& m, const std::string& what) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = read_f64_le(in, what);
}

}  // namespace urnet::internal

#endif  // URNET_SRC_BINARY_IO_H_
