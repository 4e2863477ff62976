// SPDX-License-Identifier: Apache-2.0
#include "slidegraph/raster.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "slidegraph/binary_io.hpp"
#include "slidegraph/error.hpp"

namespace slidegraph {

RasterImage::RasterImage(std::size_t width, std::size_t height, Rgb fill) : width_(width), height_(height) {
  samples_.resize(width * height * 3);
  for (std::size_t i = 0; i < width * height; ++i)
    std::copy(fill.begin(), fill.end(), samples_.begin() + static_cast<std::ptrdiff_t>(i * 3));
}

RasterImage::RasterImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> samples)
    : width_(width), height_(height), samples_(std::move(samples)) {
  require(samples_.size() == width * height * 3,
          [&] { return "raster sample count does not match " + std::to_string(width) +
                                                     "x" + std::to_string(height) + "x3"; });
}

Rgb RasterImage::pixel(std::size_t x, std::size_t y) const {
  const std::size_t o = (y * width_ + x) * 3;
  return {samples_[o], samples_[o + 1], samples_[o + 2]};
}

void RasterImage::set_pixel(std::size_t x, std::size_t y, Rgb rgb) {
  const std::size_t o = (y * width_ + x) * 3;
  samples_[o] = rgb[0];
  samples_[o + 1] = rgb[1];
  samples_[o + 2] = rgb[2];
}

RasterImage RasterImage::crop(std::size_t x0, std::size_t y0, std::size_t w, std::size_t h) const {
  require(x0 + w <= width_ && y0 + h <= height_, "crop rectangle outside image");
  RasterImage out(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    const auto* src = samples_.data() + ((y0 + y) * width_ + x0) * 3;
    std::copy_n(src, w * 3, out.samples_.data() + y * w * 3);
  }
  return out;
}

void RasterImage::paste(const RasterImage& tile, std::size_t x0, std::size_t y0) {
  require(x0 + tile.width_ <= width_ && y0 + tile.height_ <= height_, "paste rectangle outside image");
  for (std::size_t y = 0; y < tile.height_; ++y) {
    const auto* src = tile.samples_.data() + y * tile.width_ * 3;
    std::copy_n(src, tile.width_ * 3, samples_.data() + ((y0 + y) * width_ + x0) * 3);
  }
}

std::vector<std::uint8_t> encode_ppm(const RasterImage& image, std::string_view comment) {
  std::string header = "P6\n";
  while (!comment.empty()) {
    const std::size_t nl = comment.find('\n');
    header += "# ";
    header += comment.substr(0, nl);
    header += '\n';
    comment = nl == std::string_view::npos ? std::string_view{} : comment.substr(nl + 1);
  }
  header += std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.samples().begin(), image.samples().end());
  return out;
}

RasterImage decode_ppm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto skip_space_and_comments = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&]() -> std::size_t {
    skip_space_and_comments();
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) throw FormatError("malformed PPM header");
    std::size_t v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos] - '0');
      if (v > (1u << 30)) throw FormatError("PPM dimension too large");
      ++pos;
    }
    return v;
  };

  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') throw FormatError("not a binary PPM (P6)");
  pos = 2;
  const std::size_t w = read_uint();
  const std::size_t h = read_uint();
  const std::size_t maxval = read_uint();
  if (maxval != 255) throw FormatError("only maxval 255 PPM is supported, got " + std::to_string(maxval));
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw FormatError("malformed PPM header");
  ++pos;
  const std::size_t n = w * h * 3;
  if (bytes.size() - pos != n) throw FormatError("PPM payload size mismatch");
  return RasterImage(w, h, std::vector<std::uint8_t>(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end()));
}

std::vector<std::string> ppm_comments(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') throw FormatError("not a binary PPM (P6)");
  std::vector<std::string> out;
  std::size_t pos = 2;
  int fields = 0;
  while (pos < bytes.size() && fields < 3) {
    if (bytes[pos] == '#') {
      std::size_t end = pos;
      while (end < bytes.size() && bytes[end] != '\n') ++end;
      std::size_t begin = pos + 1;
      if (begin < end && bytes[begin] == ' ') ++begin;
      out.emplace_back(bytes.begin() + static_cast<std::ptrdiff_t>(begin),
                       bytes.begin() + static_cast<std::ptrdiff_t>(end));
      pos = end;
    } else if (std::isspace(bytes[pos])) {
      ++pos;
    } else {
      while (pos < bytes.size() && std::isdigit(bytes[pos])) ++pos;
      ++fields;
      if (pos < bytes.size() && !std::isspace(bytes[pos]) && bytes[pos] != '#') break;
    }
  }
  return out;
}

std::vector<std::string> read_ppm_comments(const std::filesystem::path& path) {
  return ppm_comments(io::read_file(path));
}

void write_ppm(const std::filesystem::path& path, const RasterImage& image, std::string_view comment) {
  const auto bytes = encode_ppm(image, comment);
  io::write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

RasterImage read_ppm(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  try {
    return decode_ppm(bytes);
  } catch (const FormatError& e) {
    throw FormatError(std::string(e.what()) + ": " + path.string());
  }
}

}  // namespace slidegraph
