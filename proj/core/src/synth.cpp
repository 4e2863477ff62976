// SPDX-License-Identifier: Apache-2.0
#include "slidegraph/synth.hpp"

#include <algorithm>
#include <vector>

#include "slidegraph/error.hpp"
#include "slidegraph/rng.hpp"

namespace slidegraph {
namespace {

std::uint8_t clamp8(int v) { return static_cast<std::uint8_t>(std::clamp(v, 0, 255)); }

Rgb jitter(Rgb base, int amplitude, Rng& rng) {
  if (amplitude <= 0) return base;
  Rgb out;
  for (int c = 0; c < 3; ++c) out[c] = clamp8(base[c] + static_cast<int>(rng.between(-amplitude, amplitude)));
  return out;
}

}  // namespace

SyntheticSlideSpec SyntheticSlideSpec::for_class(int class_id, std::uint64_t seed, std::size_t width,
                                                 std::size_t height) {
  require(class_id >= 0, "class_id must be non-negative");
  SyntheticSlideSpec s;
  s.class_id = class_id;
  s.seed = seed;
  s.width = width;
  s.height = height;
  s.blob_density = 15 + 25 * class_id;
  s.blob_radius_min = 2;
  s.blob_radius_max = 3 + class_id;
  s.stain_color = {clamp8(160 - 25 * class_id), clamp8(90 - 15 * class_id), clamp8(175 - 5 * class_id)};
  return s;
}

RasterImage generate_synthetic_slide(const SyntheticSlideSpec& spec) {
  require(spec.width > 0 && spec.height > 0, "synthetic slide must have positive area");
  require(spec.blob_radius_min >= 0 && spec.blob_radius_min <= spec.blob_radius_max, "bad blob radius range");
  Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(spec.class_id)));
  const auto W = static_cast<std::int64_t>(spec.width);
  const auto H = static_cast<std::int64_t>(spec.height);

  RasterImage img(spec.width, spec.height);
  for (std::int64_t y = 0; y < H; ++y)
    for (std::int64_t x = 0; x < W; ++x) img.set_pixel(x, y, jitter(spec.background, spec.background_noise, rng));

  // Tissue region: union of axis-aligned ellipses.
  struct Ellipse {
    std::int64_t cx, cy, rx, ry;
  };
  std::vector<Ellipse> lobes;
  for (int i = 0; i < spec.tissue_lobes; ++i) {
    const std::int64_t rx = std::max<std::int64_t>(1, rng.between(W / 6, W / 3));
    const std::int64_t ry = std::max<std::int64_t>(1, rng.between(H / 6, H / 3));
    lobes.push_back({rng.between(W / 4, (3 * W) / 4), rng.between(H / 4, (3 * H) / 4), rx, ry});
  }
  std::vector<std::uint8_t> tissue(spec.width * spec.height, 0);
  std::vector<std::size_t> tissue_px;
  for (std::int64_t y = 0; y < H; ++y) {
    for (std::int64_t x = 0; x < W; ++x) {
      bool inside = false;
      for (const Ellipse& e : lobes) {
        const std::int64_t dx = x - e.cx, dy = y - e.cy;
        if (dx * dx * e.ry * e.ry + dy * dy * e.rx * e.rx <= e.rx * e.rx * e.ry * e.ry) {
          inside = true;
          break;
        }
      }
      if (!inside) continue;
      tissue[y * W + x] = 1;
      tissue_px.push_back(static_cast<std::size_t>(y * W + x));
      img.set_pixel(x, y, jitter(spec.tissue_color, spec.tissue_noise, rng));
    }
  }
  if (tissue_px.empty()) return img;

  // Nuclei. Slide-level density varies by +-20% around the class mean.
  const std::int64_t expected = static_cast<std::int64_t>(spec.blob_density) *
                                static_cast<std::int64_t>(tissue_px.size()) / 10000;
  const std::int64_t count = expected * rng.between(80, 120) / 100;
  for (std::int64_t b = 0; b < count; ++b) {
    const std::size_t p = tissue_px[rng.below(tissue_px.size())];
    const std::int64_t cx = static_cast<std::int64_t>(p) % W, cy = static_cast<std::int64_t>(p) / W;
    const std::int64_t r = rng.between(spec.blob_radius_min, spec.blob_radius_max);
    const Rgb color = jitter(spec.stain_color, spec.stain_jitter, rng);
    for (std::int64_t y = std::max<std::int64_t>(0, cy - r); y <= std::min(H - 1, cy + r); ++y) {
      for (std::int64_t x = std::max<std::int64_t>(0, cx - r); x <= std::min(W - 1, cx + r); ++x) {
        if ((x - cx) * (x - cx) + (y - cy) * (y - cy) > r * r) continue;
        if (!tissue[y * W + x]) continue;
        img.set_pixel(x, y, jitter(color, 4, rng));
      }
    }
  }
  return img;
}

}  // namespace slidegraph
