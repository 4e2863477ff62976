// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace slidegraph {

using Rgb = std::array<std::uint8_t, 3>;

/// Interleaved 8-bit RGB raster, row-major. samples().size() == width*height*3.
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(std::size_t width, std::size_t height, Rgb fill = {0, 0, 0});
  RasterImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> samples);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t pixel_count() const { return width_ * height_; }
  bool empty() const { return samples_.empty(); }

  std::uint8_t& at(std::size_t x, std::size_t y, std::size_t c) { return samples_[(y * width_ + x) * 3 + c]; }
  std::uint8_t at(std::size_t x, std::size_t y, std::size_t c) const { return samples_[(y * width_ + x) * 3 + c]; }
  Rgb pixel(std::size_t x, std::size_t y) const;
  void set_pixel(std::size_t x, std::size_t y, Rgb rgb);

  std::span<std::uint8_t> samples() { return samples_; }
  std::span<const std::uint8_t> samples() const { return samples_; }

  /// Copy of the w x h sub-rectangle with top-left corner (x0, y0).
  RasterImage crop(std::size_t x0, std::size_t y0, std::size_t w, std::size_t h) const;
  /// Paste `tile` with its top-left corner at (x0, y0).
  void paste(const RasterImage& tile, std::size_t x0, std::size_t y0);

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::uint8_t> samples_;
};

/// Binary PPM (P6, maxval 255). Round trips are bit-exact. A non-empty
/// `comment` is written as one "# " line after the magic; each line of it
/// becomes its own comment line.
void write_ppm(const std::filesystem::path& path, const RasterImage& image, std::string_view comment = {});
RasterImage read_ppm(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_ppm(const RasterImage& image, std::string_view comment = {});
RasterImage decode_ppm(std::span<const std::uint8_t> bytes);
/// Header comment lines, without the leading "#" and one following space.
std::vector<std::string> ppm_comments(std::span<const std::uint8_t> bytes);
std::vector<std::string> read_ppm_comments(const std::filesystem::path& path);

}  // namespace slidegraph
