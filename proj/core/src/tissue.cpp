// SPDX-License-Identifier: Apache-2.0
#include "slidegraph/tissue.hpp"

#include <algorithm>

#include "slidegraph/binary_io.hpp"
#include "slidegraph/error.hpp"

namespace slidegraph {

std::size_t TissueMask::count() const {
  return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), std::uint8_t{1}));
}

double luminance(Rgb rgb) { return 0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2]; }

TissueMask segment_tissue(const RasterImage& image, const SegmentParams& params) {
  require(!image.empty(), "segment_tissue needs a nonempty image");
  const std::size_t w = image.width(), h = image.height();
  TissueMask mask{w, h, std::vector<std::uint8_t>(w * h, 0)};
  const double cut = params.luminance_threshold * 255.0;
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) mask.flags[y * w + x] = luminance(image.pixel(x, y)) < cut ? 1 : 0;

  if (params.min_region_px <= 1) return mask;

  // Drop small 4-connected components.
  std::vector<std::uint8_t> seen(w * h, 0);
  std::vector<std::size_t> stack, region;
  for (std::size_t start = 0; start < w * h; ++start) {
    if (!mask.flags[start] || seen[start]) continue;
    region.clear();
    stack.assign(1, start);
    seen[start] = 1;
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      region.push_back(p);
      const std::size_t x = p % w, y = p / w;
      auto visit = [&](std::size_t q) {
        if (mask.flags[q] && !seen[q]) {
          seen[q] = 1;
          stack.push_back(q);
        }
      };
      if (x > 0) visit(p - 1);
      if (x + 1 < w) visit(p + 1);
      if (y > 0) visit(p - w);
      if (y + 1 < h) visit(p + w);
    }
    if (region.size() < params.min_region_px)
      for (std::size_t p : region) mask.flags[p] = 0;
  }
  return mask;
}

RasterImage apply_mask(const RasterImage& image, const TissueMask& mask) {
  require(mask.width == image.width() && mask.height == image.height(), "mask and image dimensions differ");
  RasterImage out = image;
  for (std::size_t y = 0; y < image.height(); ++y)
    for (std::size_t x = 0; x < image.width(); ++x)
      if (!mask.at(x, y)) out.set_pixel(x, y, {255, 255, 255});
  return out;
}

RasterImage mask_to_image(const TissueMask& mask) {
  RasterImage out(mask.width, mask.height);
  for (std::size_t y = 0; y < mask.height; ++y)
    for (std::size_t x = 0; x < mask.width; ++x)
      if (mask.at(x, y)) out.set_pixel(x, y, {255, 255, 255});
  return out;
}

TissueMask mask_from_image(const RasterImage& image) {
  TissueMask mask{image.width(), image.height(), std::vector<std::uint8_t>(image.pixel_count(), 0)};
  for (std::size_t y = 0; y < image.height(); ++y)
    for (std::size_t x = 0; x < image.width(); ++x) mask.flags[y * image.width() + x] = image.at(x, y, 0) >= 128;
  return mask;
}

Point2 tile_centroid(std::size_t grid_row, std::size_t grid_col, std::size_t patch_size) {
  const double half = static_cast<double>(patch_size) / 2.0;
  return {static_cast<double>(grid_col * patch_size) + half, static_cast<double>(grid_row * patch_size) + half};
}

std::vector<Patch> extract_patches(const RasterImage& image, const TissueMask& mask, std::size_t patch_size,
                                   double min_tissue_fraction) {
  require(patch_size >= 1, "patch_size must be at least 1");
  require(min_tissue_fraction >= 0.0 && min_tissue_fraction <= 1.0, "min_tissue_fraction must lie in [0,1]");
  require(mask.width == image.width() && mask.height == image.height(), "mask and image dimensions differ");
  std::vector<Patch> out;
  const std::size_t grid_rows = image.height() / patch_size;
  const std::size_t grid_cols = image.width() / patch_size;
  const double area = static_cast<double>(patch_size * patch_size);
  for (std::size_t r = 0; r < grid_rows; ++r) {
    for (std::size_t c = 0; c < grid_cols; ++c) {
      std::size_t tissue = 0;
      for (std::size_t y = r * patch_size; y < (r + 1) * patch_size; ++y)
        for (std::size_t x = c * patch_size; x < (c + 1) * patch_size; ++x) tissue += mask.at(x, y) ? 1 : 0;
      const double frac = static_cast<double>(tissue) / area;
      // An empty tile is never kept, even at threshold 0.
      if (tissue == 0 || frac < min_tissue_fraction) continue;
      out.push_back({image.crop(c * patch_size, r * patch_size, patch_size, patch_size), r, c,
                     tile_centroid(r, c, patch_size), frac});
    }
  }
  return out;
}

double blue_ratio(Rgb rgb) {
  const double r = rgb[0], g = rgb[1], b = rgb[2];
  return (100.0 * b / (1.0 + r + g)) * (256.0 / (1.0 + r + g + b));
}

BlueRatioMap blue_ratio(const RasterImage& image) {
  require(!image.empty(), "blue_ratio needs a nonempty image");
  BlueRatioMap map{image.width(), image.height(), std::vector<double>(image.pixel_count()), 0.0};
  double total = 0.0;
  for (std::size_t y = 0; y < image.height(); ++y) {
    for (std::size_t x = 0; x < image.width(); ++x) {
      const double v = blue_ratio(image.pixel(x, y));
      map.values[y * image.width() + x] = v;
      total += v;
    }
  }
  map.mean = total / static_cast<double>(image.pixel_count());
  return map;
}

double mean_blue_ratio(const RasterImage& image) { return blue_ratio(image).mean; }

namespace {
constexpr std::string_view kPatchMagic{"SGPATCH\0", 8};
}

void save_patch_set(const std::filesystem::path& path, const PatchSet& set) {
  io::Writer w;
  w.raw(kPatchMagic);
  w.u32(PatchSet::kVersion);
  w.u64(set.config_hash);
  w.str(set.slide_id);
  w.i32(set.label);
  w.u32(static_cast<std::uint32_t>(set.patch_size));
  w.u32(static_cast<std::uint32_t>(set.patches.size()));
  for (const Patch& p : set.patches) {
    require(p.pixels.width() == set.patch_size && p.pixels.height() == set.patch_size,
            "patch dimensions differ from the set's patch size");
    w.u32(static_cast<std::uint32_t>(p.grid_row));
    w.u32(static_cast<std::uint32_t>(p.grid_col));
    w.f64(p.centroid.x);
    w.f64(p.centroid.y);
    w.f64(p.tissue_fraction);
    w.raw(std::string_view(reinterpret_cast<const char*>(p.pixels.samples().data()), p.pixels.samples().size()));
  }
  w.save(path);
}

PatchSet load_patch_set(const std::filesystem::path& path) {
  io::Reader r = io::Reader::open(path);
  r.expect_magic(kPatchMagic);
  r.expect_version(PatchSet::kVersion, "patch set");
  PatchSet set;
  set.config_hash = r.u64();
  set.slide_id = r.str();
  set.label = r.i32();
  set.patch_size = r.u32();
  const std::uint32_t count = r.u32();
  if (set.patch_size == 0 && count > 0) throw FormatError("patch set with zero patch size: " + path.string());
  const std::size_t n = set.patch_size * set.patch_size * 3;
  for (std::uint32_t i = 0; i < count; ++i) {
    Patch p;
    p.grid_row = r.u32();
    p.grid_col = r.u32();
    p.centroid.x = r.f64();
    p.centroid.y = r.f64();
    p.tissue_fraction = r.f64();
    const std::string bytes = r.raw(n);
    p.pixels = RasterImage(set.patch_size, set.patch_size, std::vector<std::uint8_t>(bytes.begin(), bytes.end()));
    set.patches.push_back(std::move(p));
  }
  r.expect_end();
  return set;
}

}  // namespace slidegraph
