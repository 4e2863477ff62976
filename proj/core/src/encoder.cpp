// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "slidegraph/error.hpp"
#include "slidegraph/rng.hpp"
#include "slidegraph/ssl.hpp"

namespace slidegraph::ssl {

std::string_view tap_name(Tap tap) { return tap == Tap::Small ? "small" : "large"; }

Tap parse_tap(std::string_view name) {
  if (name == "small") return Tap::Small;
  if (name == "large") return Tap::Large;
  throw ContractViolation("unknown feature tap '" + std::string(name) + "' (expected small or large)");
}

std::size_t EncoderConfig::large_tap_layer() const {
  for (std::size_t i = hidden.size(); i-- > 0;)
    if (hidden[i] == tap_large_dim) return i;
  throw ContractViolation("tap_large_dim " + std::to_string(tap_large_dim) + " matches no hidden layer width");
}

void EncoderConfig::validate() const {
  require(patch_size > 0, "encoder patch_size must be positive");
  require(!hidden.empty(), "encoder needs at least one hidden layer");
  for (std::size_t w : hidden) require(w > 0, "encoder widths must be positive");
  require(tap_small_dim > 0 && projection_dim > 0, "encoder tap and projection dims must be positive");
  for (double s : input_scale) require(s > 0.0, "encoder input scale must be positive");
  (void)large_tap_layer();
}

void write_input_row(const RasterImage& patch, const EncoderConfig& config, std::span<double> row) {
  const auto s = patch.samples();
  require(row.size() == s.size(), "patch does not match encoder input size");
  double inv[3];
  for (std::size_t c = 0; c < 3; ++c) inv[c] = 1.0 / config.input_scale[c];
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::size_t c = i % 3;
    row[i] = (static_cast<double>(s[i]) - config.input_mean[c]) * inv[c];
  }
}

Tensor images_to_input(std::span<const RasterImage> images, const EncoderConfig& config) {
  require(!images.empty(), "images_to_input needs at least one image");
  const std::size_t dim = images[0].samples().size();
  Tensor x({images.size(), dim});
  for (std::size_t i = 0; i < images.size(); ++i) write_input_row(images[i], config, x.row(i));
  return x;
}

void fit_input_standardization(EncoderConfig& config, std::span<const RasterImage> images) {
  require(!images.empty(), "input standardisation needs at least one image");
  double sum[3] = {0, 0, 0}, sq[3] = {0, 0, 0};
  double count = 0;
  for (const RasterImage& img : images) {
    const auto s = img.samples();
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double v = s[i];
      sum[i % 3] += v;
      sq[i % 3] += v * v;
    }
    count += static_cast<double>(img.pixel_count());
  }
  for (std::size_t c = 0; c < 3; ++c) {
    const double mean = sum[c] / count;
    config.input_mean[c] = mean;
    config.input_scale[c] = std::max(1.0, std::sqrt(std::max(0.0, sq[c] / count - mean * mean)));
  }
}

namespace {

std::string weight_name(std::size_t layer) { return "body." + std::to_string(layer) + ".weight"; }
std::string bias_name(std::size_t layer) { return "body." + std::to_string(layer) + ".bias"; }

std::vector<std::size_t> body_widths(const EncoderConfig& c) {
  std::vector<std::size_t> w = c.hidden;
  w.push_back(c.tap_small_dim);
  return w;
}

ParameterSet init_params(const EncoderConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(mix_seed(seed, 0x5551));
  ParameterSet p;
  std::size_t fan_in = config.input_dim();
  for (std::size_t i = 0; const std::size_t width : body_widths(config)) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    p.add(weight_name(i), Tensor::uniform({fan_in, width}, bound, rng));
    p.add(bias_name(i), Tensor({width}, 0.0));
    fan_in = width;
    ++i;
  }
  const double bound = std::sqrt(3.0 / static_cast<double>(fan_in));
  p.add("proj.weight", Tensor::uniform({fan_in, config.projection_dim}, bound, rng));
  p.add("proj.bias", Tensor({config.projection_dim}, 0.0));
  return p;
}

void add_bias_relu(Tensor& x, const Tensor& b, bool apply_relu) {
  const std::size_t n = x.cols();
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    for (std::size_t j = 0; j < n; ++j) {
      row[j] += b[j];
      if (apply_relu) row[j] = row[j] > 0.0 ? row[j] : 0.0;
    }
  }
}

void normalize_rows(Tensor& x) {
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    double s = 0.0;
    for (double v : row) s += v * v;
    const double norm = std::sqrt(s);
    if (norm > 0.0)
      for (double& v : row) v /= norm;
  }
}

}  // namespace

Encoder::Encoder(EncoderConfig config, std::uint64_t seed)
    : config_(std::move(config)), params_(init_params(config_, seed)) {}

Encoder::Encoder(EncoderConfig config, ParameterSet params) : config_(std::move(config)), params_(std::move(params)) {
  config_.validate();
  require(params_.same_layout(init_params(config_, 0)), "encoder parameters do not match the configuration");
}

Encoder::TapeOutputs Encoder::forward(std::span<const Var> bound, Var input) const {
  require(bound.size() == params_.size(), "encoder forward: wrong number of bound parameters");
  require(input.value().rank() == 2 && input.value().cols() == config_.input_dim(),
          [&] { return "encoder input must be [batch, " + std::to_string(config_.input_dim()) + "]"; });
  TapeOutputs out;
  const std::size_t large_layer = config_.large_tap_layer();
  Var h = input;
  for (std::size_t i = 0; i < config_.body_layers(); ++i) {
    h = relu(add_bias(matmul(h, bound[2 * i]), bound[2 * i + 1]));
    if (i == large_layer) out.large = h;
  }
  out.small = h;
  const std::size_t k = 2 * config_.body_layers();
  out.query = l2_normalize_rows(add_bias(matmul(h, bound[k]), bound[k + 1]));
  return out;
}

Encoder::Outputs Encoder::forward_values(const EncoderConfig& config, const ParameterSet& params,
                                         const Tensor& input) {
  require(input.rank() == 2 && input.cols() == config.input_dim(),
          [&] { return "encoder input must be [batch, " + std::to_string(config.input_dim()) + "]"; });
  Outputs out;
  const std::size_t large_layer = config.large_tap_layer();
  Tensor h = input;
  for (std::size_t i = 0; i < config.body_layers(); ++i) {
    h = matmul(h, params[2 * i]);
    add_bias_relu(h, params[2 * i + 1], true);
    if (i == large_layer) out.large = h;
  }
  out.small = h;
  const std::size_t k = 2 * config.body_layers();
  out.query = matmul(h, params[k]);
  add_bias_relu(out.query, params[k + 1], false);
  normalize_rows(out.query);
  return out;
}

std::vector<double> extract_features(const Encoder& encoder, const RasterImage& patch, Tap tap) {
  const RasterImage one[1] = {patch};
  Encoder::Outputs out = encoder.forward_values(images_to_input(one, encoder.config()));
  const Tensor& t = tap == Tap::Small ? out.small : out.large;
  return {t.data().begin(), t.data().end()};
}

FeatureMatrices extract_features(const Encoder& encoder, std::span<const Patch> patches) {
  require(!patches.empty(), "extract_features needs at least one patch");
  const EncoderConfig& c = encoder.config();
  FeatureMatrices fm{Tensor({patches.size(), c.tap_small_dim}), Tensor({patches.size(), c.tap_large_dim})};
  constexpr std::size_t kChunk = 128;
  for (std::size_t begin = 0; begin < patches.size(); begin += kChunk) {
    const std::size_t n = std::min(kChunk, patches.size() - begin);
    Tensor x({n, c.input_dim()});
    for (std::size_t i = 0; i < n; ++i) write_input_row(patches[begin + i].pixels, c, x.row(i));
    Encoder::Outputs out = encoder.forward_values(x);
    std::copy(out.small.data().begin(), out.small.data().end(), fm.small.row(begin).begin());
    std::copy(out.large.data().begin(), out.large.data().end(), fm.large.row(begin).begin());
  }
  return fm;
}

}  // namespace slidegraph::ssl

namespace slidegraph::ssl {
namespace {

// Round-trip exact decimal form of a double.
std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Checkpoint to_checkpoint(const Encoder& encoder) {
  const EncoderConfig& c = encoder.config();
  Checkpoint ck;
  std::string hidden;
  for (std::size_t i = 0; i < c.hidden.size(); ++i) hidden += (i ? "," : "") + std::to_string(c.hidden[i]);
  ck.meta = {{"model", "encoder"},
             {"ssl.patch_size", std::to_string(c.patch_size)},
             {"ssl.hidden", hidden},
             {"ssl.tap_small_dim", std::to_string(c.tap_small_dim)},
             {"ssl.tap_large_dim", std::to_string(c.tap_large_dim)},
             {"ssl.projection_dim", std::to_string(c.projection_dim)}};
  for (std::size_t ch = 0; ch < 3; ++ch) {
    ck.meta["ssl.input_mean." + std::to_string(ch)] = exact(c.input_mean[ch]);
    ck.meta["ssl.input_scale." + std::to_string(ch)] = exact(c.input_scale[ch]);
  }
  ck.params = encoder.params();
  return ck;
}

Encoder from_checkpoint(const Checkpoint& ck) {
  auto get = [&](const std::string& key) {
    auto it = ck.meta.find(key);
    if (it == ck.meta.end()) throw FormatError("encoder checkpoint lacks metadata key " + key);
    return it->second;
  };
  if (get("model") != "encoder") throw FormatError("checkpoint does not hold a patch encoder");
  EncoderConfig c;
  c.hidden.clear();
  try {
    c.patch_size = std::stoul(get("ssl.patch_size"));
    c.tap_small_dim = std::stoul(get("ssl.tap_small_dim"));
    c.tap_large_dim = std::stoul(get("ssl.tap_large_dim"));
    c.projection_dim = std::stoul(get("ssl.projection_dim"));
    for (std::size_t ch = 0; ch < 3; ++ch) {
      c.input_mean[ch] = std::stod(get("ssl.input_mean." + std::to_string(ch)));
      c.input_scale[ch] = std::stod(get("ssl.input_scale." + std::to_string(ch)));
    }
    std::istringstream is(get("ssl.hidden"));
    std::string item;
    while (std::getline(is, item, ','))
      if (!item.empty()) c.hidden.push_back(std::stoul(item));
  } catch (const std::logic_error&) {
    throw FormatError("encoder checkpoint has malformed metadata");
  }
  return Encoder(c, ck.params);
}

}  // namespace slidegraph::ssl
