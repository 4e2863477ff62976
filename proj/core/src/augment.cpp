// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "slidegraph/error.hpp"
#include "slidegraph/rng.hpp"
#include "slidegraph/ssl.hpp"

namespace slidegraph::ssl {

void AugmentationParams::validate() const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  require(prob(p_hflip) && prob(p_vflip) && prob(p_blur), "augmentation probabilities must lie in [0,1]");
  require(contrast_lo > 0.0 && contrast_lo <= contrast_hi, "contrast range must satisfy 0 < lo <= hi");
  require(sigma_lo >= 0.0 && sigma_lo <= sigma_hi, "blur sigma range must satisfy 0 <= lo <= hi");
}

RasterImage flip_horizontal(const RasterImage& image) {
  RasterImage out = image;
  const std::size_t w = image.width();
  for (std::size_t y = 0; y < image.height(); ++y)
    for (std::size_t x = 0; x < w; ++x) out.set_pixel(x, y, image.pixel(w - 1 - x, y));
  return out;
}

RasterImage flip_vertical(const RasterImage& image) {
  RasterImage out = image;
  const std::size_t h = image.height();
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < image.width(); ++x) out.set_pixel(x, y, image.pixel(x, h - 1 - y));
  return out;
}

RasterImage adjust_contrast(const RasterImage& image, double factor) {
  if (factor == 1.0) return image;
  RasterImage out = image;
  auto src = image.samples();
  double mean = 0.0;
  for (std::uint8_t v : src) mean += v;
  mean /= static_cast<double>(src.size());
  auto dst = out.samples();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double v = std::nearbyint(mean + factor * (static_cast<double>(src[i]) - mean));
    dst[i] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
  }
  return out;
}

namespace {

// Reflect about the edge sample: -1 -> 1, n -> n-2.
std::size_t reflect(std::ptrdiff_t i, std::size_t n) {
  if (n == 1) return 0;
  const auto m = static_cast<std::ptrdiff_t>(n);
  const std::ptrdiff_t period = 2 * (m - 1);
  i %= period;
  if (i < 0) i += period;
  return static_cast<std::size_t>(i < m ? i : period - i);
}

}  // namespace

RasterImage gaussian_blur(const RasterImage& image, double sigma) {
  if (sigma <= 0.0) return image;
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
    const double v = std::exp(-static_cast<double>(i * i) / (2.0 * sigma * sigma));
    kernel[static_cast<std::size_t>(i + radius)] = v;
    total += v;
  }
  for (double& v : kernel) v /= total;

  const std::size_t w = image.width(), h = image.height();
  std::vector<double> tmp(w * h * 3, 0.0);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < 3; ++c) {
        double s = 0.0;
        for (std::ptrdiff_t k = -radius; k <= radius; ++k)
          s += kernel[static_cast<std::size_t>(k + radius)] *
               image.at(reflect(static_cast<std::ptrdiff_t>(x) + k, w), y, c);
        tmp[(y * w + x) * 3 + c] = s;
      }
  RasterImage out(w, h);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < 3; ++c) {
        double s = 0.0;
        for (std::ptrdiff_t k = -radius; k <= radius; ++k)
          s += kernel[static_cast<std::size_t>(k + radius)] *
               tmp[(reflect(static_cast<std::ptrdiff_t>(y) + k, h) * w + x) * 3 + c];
        out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::nearbyint(s), 0.0, 255.0));
      }
  return out;
}

RasterImage augment(const RasterImage& image, const AugmentationParams& params, Rng& rng) {
  params.validate();
  // Every draw happens unconditionally so the stream position does not depend
  // on earlier outcomes.
  const bool hflip = rng.bernoulli(params.p_hflip);
  const bool vflip = rng.bernoulli(params.p_vflip);
  const double contrast = rng.uniform(params.contrast_lo, params.contrast_hi);
  const bool blur = rng.bernoulli(params.p_blur);
  const double sigma = rng.uniform(params.sigma_lo, params.sigma_hi);

  RasterImage out = hflip ? flip_horizontal(image) : image;
  if (vflip) out = flip_vertical(out);
  out = adjust_contrast(out, contrast);
  if (blur) out = gaussian_blur(out, sigma);
  return out;
}

}  // namespace slidegraph::ssl
