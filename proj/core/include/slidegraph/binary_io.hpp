// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "slidegraph/tensor.hpp"

namespace slidegraph::io {

/// Little-endian binary writer shared by every on-disk artifact format.
class Writer {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s);
  void raw(std::string_view s);
  void tensor(const Tensor& t);

  const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  /// Write atomically (temp file + rename).
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::vector<std::uint8_t> bytes, std::string origin = {});
  static Reader open(const std::filesystem::path& path);

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str();
  std::string raw(std::size_t n);
  Tensor tensor();

  /// Throws FormatError unless the next bytes equal `magic`.
  void expect_magic(std::string_view magic);
  /// Reads a u32 version and throws FormatError when it differs from `expected`.
  std::uint32_t expect_version(std::uint32_t expected, std::string_view what);
  bool at_end() const { return pos_ == bytes_.size(); }
  void expect_end();

 private:
  void need(std::size_t n);
  std::vector<std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  std::string origin_;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace slidegraph::io
