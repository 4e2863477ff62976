// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "slidegraph/raster.hpp"

namespace slidegraph {

struct TissueMask {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> flags;  // 1 = tissue

  bool at(std::size_t x, std::size_t y) const { return flags[y * width + x] != 0; }
  std::size_t count() const;
  friend bool operator==(const TissueMask&, const TissueMask&) = default;
};

struct SegmentParams {
  /// Fraction of full scale (255); a pixel is tissue when its luminance is below it.
  double luminance_threshold = 0.85;
  /// 4-connected tissue regions smaller than this are dropped.
  std::size_t min_region_px = 64;
};

/// Rec.601 luma of an 8-bit pixel, in [0, 255].
double luminance(Rgb rgb);

TissueMask segment_tissue(const RasterImage& image, const SegmentParams& params = {});

/// Copy of `image` with every non-tissue pixel set to white.
RasterImage apply_mask(const RasterImage& image, const TissueMask& mask);

/// Mask as a black/white PPM (tissue white) for inspection.
RasterImage mask_to_image(const TissueMask& mask);
TissueMask mask_from_image(const RasterImage& image);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

struct Patch {
  RasterImage pixels;
  std::size_t grid_row = 0;
  std::size_t grid_col = 0;
  Point2 centroid;
  double tissue_fraction = 0.0;

  friend bool operator==(const Patch&, const Patch&) = default;
};

/// Non-overlapping grid tiling with stride = patch_size; tiles whose tissue
/// fraction is below `min_tissue_fraction` are discarded, partial tiles at the
/// right/bottom edge are dropped. Output ordered by (grid_row, grid_col).
std::vector<Patch> extract_patches(const RasterImage& image, const TissueMask& mask, std::size_t patch_size,
                                   double min_tissue_fraction = 0.5);

/// Centroid of tile (row, col) in source-image pixel coordinates.
Point2 tile_centroid(std::size_t grid_row, std::size_t grid_col, std::size_t patch_size);

struct BlueRatioMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;
  double mean = 0.0;
};

/// Per-pixel blue ratio, Br = 100 B / (1 + R + G) * 256 / (1 + R + G + B).
double blue_ratio(Rgb rgb);
BlueRatioMap blue_ratio(const RasterImage& image);
double mean_blue_ratio(const RasterImage& image);

/// Patch set file:
///   magic "SGPATCH\0" | u32 version (=1) | u64 config_hash | str slide_id
///   i32 label | u32 patch_size | u32 count
///   { u32 grid_row | u32 grid_col | f64 cx | f64 cy | f64 tissue_fraction
///     | u8 samples[patch_size*patch_size*3] }*
struct PatchSet {
  static constexpr std::uint32_t kVersion = 1;

  std::uint64_t config_hash = 0;
  std::string slide_id;
  std::int32_t label = -1;
  std::size_t patch_size = 0;
  std::vector<Patch> patches;

  friend bool operator==(const PatchSet&, const PatchSet&) = default;
};

void save_patch_set(const std::filesystem::path& path, const PatchSet& set);
PatchSet load_patch_set(const std::filesystem::path& path);

}  // namespace slidegraph
