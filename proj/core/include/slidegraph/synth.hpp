// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "slidegraph/raster.hpp"

namespace slidegraph {

/// Per-class appearance of a synthetic slide. All generation arithmetic is
/// integer-only on top of the portable Rng bit stream, so images are
/// bit-identical across platforms for a given spec.
struct SyntheticSlideSpec {
  int class_id = 0;
  std::size_t width = 256;
  std::size_t height = 256;
  std::uint64_t seed = 0;

  Rgb background{243, 241, 245};
  int background_noise = 3;

  /// Tissue is the union of `tissue_lobes` random ellipses.
  int tissue_lobes = 3;
  Rgb tissue_color{226, 160, 196};
  int tissue_noise = 10;

  /// Stained nuclei: expected blobs per 10,000 tissue pixels, radius range in
  /// pixels, and a mean stain colour with per-blob jitter.
  int blob_density = 20;
  int blob_radius_min = 2;
  int blob_radius_max = 3;
  Rgb stain_color{150, 80, 170};
  int stain_jitter = 18;

  /// Defaults for `class_id`: density, radius and stain darkness/blueness all
  /// increase with the class index.
  static SyntheticSlideSpec for_class(int class_id, std::uint64_t seed, std::size_t width = 256,
                                      std::size_t height = 256);
};

/// Throws ContractViolation for a zero-area spec.
RasterImage generate_synthetic_slide(const SyntheticSlideSpec& spec);

}  // namespace slidegraph
