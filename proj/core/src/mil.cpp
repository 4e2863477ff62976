// SPDX-License-Identifier: Apache-2.0
#include "slidegraph/mil.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "slidegraph/error.hpp"
#include "slidegraph/log.hpp"
#include "slidegraph/rng.hpp"

namespace slidegraph::mil {
namespace {

std::size_t grid_side(std::size_t bag_size) {
  const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(bag_size))));
  require(side * side == bag_size, [&] { return "bag size " + std::to_string(bag_size) + " is not a perfect square"; });
  return side;
}

}  // namespace

TileBag select_tiles(std::span<const Patch> patches, std::size_t bag_size, std::size_t patch_size) {
  require(bag_size > 0, "bag size must be positive");
  if (!patches.empty()) patch_size = patches[0].pixels.width();
  require(patch_size > 0, "patch size must be positive");
  if (patches.empty()) log::warn("slide has no patches; bag is all padding");

  std::vector<double> br(patches.size());
  for (std::size_t i = 0; i < patches.size(); ++i) {
    require(patches[i].pixels.width() == patch_size && patches[i].pixels.height() == patch_size,
            "patches in one bag must share a size");
    br[i] = mean_blue_ratio(patches[i].pixels);
  }
  std::vector<std::size_t> order(patches.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (br[a] != br[b]) return br[a] > br[b];
    if (patches[a].grid_row != patches[b].grid_row) return patches[a].grid_row < patches[b].grid_row;
    return patches[a].grid_col < patches[b].grid_col;
  });

  TileBag bag;
  bag.patch_size = patch_size;
  bag.real_tiles = std::min(bag_size, patches.size());
  for (std::size_t i = 0; i < bag.real_tiles; ++i) {
    bag.tiles.push_back(patches[order[i]].pixels);
    bag.blue_ratio.push_back(br[order[i]]);
  }
  const RasterImage white(patch_size, patch_size, Rgb{255, 255, 255});
  const double white_br = blue_ratio(Rgb{255, 255, 255});
  while (bag.tiles.size() < bag_size) {
    bag.tiles.push_back(white);
    bag.blue_ratio.push_back(white_br);
  }
  return bag;
}

RasterImage concat_bag(const TileBag& bag) {
  const std::size_t side = grid_side(bag.tiles.size());
  const std::size_t p = bag.patch_size;
  RasterImage mosaic(side * p, side * p);
  for (std::size_t i = 0; i < bag.tiles.size(); ++i) mosaic.paste(bag.tiles[i], (i % side) * p, (i / side) * p);
  return mosaic;
}

RasterImage mosaic_cell(const RasterImage& mosaic, std::size_t index, std::size_t patch_size) {
  const std::size_t side = mosaic.width() / patch_size;
  require(index < side * side, "mosaic cell index out of range");
  return mosaic.crop((index % side) * patch_size, (index / side) * patch_size, patch_size, patch_size);
}

std::vector<double> bag_features(const RasterImage& mosaic, std::size_t patch_size) {
  require(patch_size > 0 && mosaic.width() % patch_size == 0 && mosaic.width() == mosaic.height(),
          "mosaic must be a square grid of patch_size cells");
  const std::size_t side = mosaic.width() / patch_size;
  std::vector<double> f;
  f.reserve(side * side * kFeaturesPerCell);
  const double area = static_cast<double>(patch_size * patch_size);
  for (std::size_t cell = 0; cell < side * side; ++cell) {
    const std::size_t x0 = (cell % side) * patch_size, y0 = (cell / side) * patch_size;
    double r = 0, g = 0, b = 0, br = 0;
    for (std::size_t y = y0; y < y0 + patch_size; ++y)
      for (std::size_t x = x0; x < x0 + patch_size; ++x) {
        const Rgb px = mosaic.pixel(x, y);
        r += px[0];
        g += px[1];
        b += px[2];
        br += blue_ratio(px);
      }
    f.push_back(r / area / 255.0);
    f.push_back(g / area / 255.0);
    f.push_back(b / area / 255.0);
    f.push_back(br / area / 50.0);
  }
  return f;
}

void MilConfig::validate() const {
  (void)grid_side(bag_size);
  require(num_classes >= 2, "baseline needs at least two classes");
  for (std::size_t w : hidden) require(w > 0, "baseline hidden widths must be positive");
}

namespace {

ParameterSet init_params(const MilConfig& c, std::uint64_t seed) {
  c.validate();
  Rng rng(mix_seed(seed, 0x311));
  ParameterSet p;
  std::size_t d = c.input_dim();
  for (std::size_t i = 0; i < c.hidden.size(); ++i) {
    p.add("hidden." + std::to_string(i) + ".weight",
          Tensor::uniform({d, c.hidden[i]}, std::sqrt(6.0 / static_cast<double>(d)), rng));
    p.add("hidden." + std::to_string(i) + ".bias", Tensor({c.hidden[i]}, 0.0));
    d = c.hidden[i];
  }
  p.add("out.weight", Tensor::uniform({d, c.num_classes}, std::sqrt(3.0 / static_cast<double>(d)), rng));
  p.add("out.bias", Tensor({c.num_classes}, 0.0));
  return p;
}

Tensor bag_input(const TileBag& bag, const MilConfig& c) {
  require(bag.tiles.size() == c.bag_size, [&] { return "bag holds " + std::to_string(bag.tiles.size()) +
                                              " tiles, model expects " + std::to_string(c.bag_size); });
  std::vector<double> f = bag_features(concat_bag(bag), bag.patch_size);
  const std::size_t n = f.size();
  return Tensor({1, n}, std::move(f));
}

}  // namespace

MilModel::MilModel(MilConfig config, std::uint64_t seed)
    : config_(std::move(config)), params_(init_params(config_, seed)) {}

MilModel::MilModel(MilConfig config, ParameterSet params) : config_(std::move(config)), params_(std::move(params)) {
  require(params_.same_layout(init_params(config_, 0)), "baseline parameters do not match the configuration");
}

Var MilModel::logits(std::span<const Var> bound, const Tensor& features) const {
  require(bound.size() == params_.size(), "baseline forward: wrong number of bound parameters");
  Var h = bound[0].tape()->constant(features);
  std::size_t k = 0;
  for (std::size_t i = 0; i < config_.hidden.size(); ++i, k += 2) h = relu(add_bias(matmul(h, bound[k]), bound[k + 1]));
  return add_bias(matmul(h, bound[k]), bound[k + 1]);
}

TrainResult train_baseline(std::span<const TileBag> bags, const MilConfig& model_config, const TrainConfig& config) {
  require(!bags.empty(), "baseline training needs at least one bag");
  std::vector<Tensor> inputs;
  std::vector<std::size_t> labels;
  for (const TileBag& b : bags) {
    require(b.label >= 0 && static_cast<std::size_t>(b.label) < model_config.num_classes,
            [&] { return "bag label " + std::to_string(b.label) + " out of range for " +
                std::to_string(model_config.num_classes) + " classes"; });
    inputs.push_back(bag_input(b, model_config));
    labels.push_back(static_cast<std::size_t>(b.label));
  }
  MilModel model(model_config, config.seed);
  LossCurve curve = fit_per_sample(model.params(), bags.size(), config,
                                   [&](Tape&, std::span<const Var> bound, std::size_t i) {
                                     return softmax_cross_entropy(model.logits(bound, inputs[i]), labels[i]);
                                   });
  return {std::move(model), std::move(curve)};
}

std::vector<double> predict_baseline(const MilModel& model, const TileBag& bag) {
  Tape tape;
  std::vector<Var> bound = model.params().bind_constant(tape);
  Tensor p = softmax_rows(model.logits(bound, bag_input(bag, model.config())).value());
  return {p.data().begin(), p.data().end()};
}

Checkpoint to_checkpoint(const MilModel& model) {
  Checkpoint ck;
  ck.meta["model"] = "mil";
  ck.meta["mil.bag_size"] = std::to_string(model.config().bag_size);
  ck.meta["mil.num_classes"] = std::to_string(model.config().num_classes);
  std::string hidden;
  for (std::size_t i = 0; i < model.config().hidden.size(); ++i)
    hidden += (i ? "," : "") + std::to_string(model.config().hidden[i]);
  ck.meta["mil.hidden"] = hidden;
  ck.params = model.params();
  return ck;
}

MilModel from_checkpoint(const Checkpoint& ck) {
  auto get = [&](const std::string& key) {
    auto it = ck.meta.find(key);
    if (it == ck.meta.end()) throw FormatError("baseline checkpoint lacks metadata key " + key);
    return it->second;
  };
  if (get("model") != "mil") throw FormatError("checkpoint does not hold a baseline model");
  MilConfig c;
  c.hidden.clear();
  try {
    c.bag_size = std::stoul(get("mil.bag_size"));
    c.num_classes = std::stoul(get("mil.num_classes"));
    std::istringstream is(get("mil.hidden"));
    std::string item;
    while (std::getline(is, item, ','))
      if (!item.empty()) c.hidden.push_back(std::stoul(item));
  } catch (const std::logic_error&) {
    throw FormatError("baseline checkpoint has malformed metadata");
  }
  return MilModel(c, ck.params);
}

}  // namespace slidegraph::mil
