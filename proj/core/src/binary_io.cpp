// SPDX-License-Identifier: Apache-2.0
#include "slidegraph/binary_io.hpp"

#include <fstream>
#include <iterator>

#include "slidegraph/error.hpp"

namespace slidegraph::io {

void Writer::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void Writer::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void Writer::str(std::string_view s) {
  u32(static_cast<std::uint32_t>(s.size()));
  raw(s);
}

void Writer::raw(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }

void Writer::tensor(const Tensor& t) {
  u32(static_cast<std::uint32_t>(t.rank()));
  for (std::size_t e : t.shape()) u64(e);
  for (double v : t.data()) f64(v);
}

void Writer::save(const std::filesystem::path& path) const {
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes_.data()), bytes_.size()));
}

Reader::Reader(std::vector<std::uint8_t> bytes, std::string origin)
    : bytes_(std::move(bytes)), origin_(std::move(origin)) {}

Reader Reader::open(const std::filesystem::path& path) { return Reader(read_file(path), path.string()); }

void Reader::need(std::size_t n) {
  if (bytes_.size() - pos_ < n)
    throw FormatError("truncated file" + (origin_.empty() ? std::string() : ": " + origin_));
}

std::uint8_t Reader::u8() {
  need(1);
  return bytes_[pos_++];
}

std::uint32_t Reader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
  return v;
}

std::uint64_t Reader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
  return v;
}

std::string Reader::str() { return raw(u32()); }

std::string Reader::raw(std::size_t n) {
  need(n);
  std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
  pos_ += n;
  return s;
}

Tensor Reader::tensor() {
  const std::uint32_t rank = u32();
  if (rank == 0 || rank > 8) throw FormatError("bad tensor rank in " + origin_);
  Shape shape(rank);
  std::size_t count = 1;
  for (auto& e : shape) {
    e = u64();
    if (e == 0) throw FormatError("zero tensor extent in " + origin_);
    count *= e;
  }
  need(count * 8);
  std::vector<double> data(count);
  for (double& v : data) v = f64();
  return Tensor(std::move(shape), std::move(data));
}

void Reader::expect_magic(std::string_view magic) {
  if (bytes_.size() - pos_ < magic.size() || raw(magic.size()) != magic)
    throw FormatError("bad magic, expected \"" + std::string(magic.substr(0, magic.find('\0'))) + "\"" +
                      (origin_.empty() ? std::string() : " in " + origin_));
}

std::uint32_t Reader::expect_version(std::uint32_t expected, std::string_view what) {
  const std::uint32_t v = u32();
  if (v != expected)
    throw FormatError(std::string(what) + " format version " + std::to_string(v) + " is not supported (expected " +
                      std::to_string(expected) + ")" + (origin_.empty() ? std::string() : ": " + origin_));
  return v;
}

void Reader::expect_end() {
  if (!at_end()) throw FormatError("trailing bytes in " + origin_);
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace slidegraph::io
