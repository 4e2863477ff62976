// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "slidegraph/checkpoint.hpp"
#include "slidegraph/raster.hpp"
#include "slidegraph/tissue.hpp"
#include "slidegraph/trainer.hpp"

namespace slidegraph::mil {

/// Exactly `bag_size` tiles, highest mean blue ratio first, padded with
/// all-white tiles when the slide has fewer patches.
struct TileBag {
  std::vector<RasterImage> tiles;
  std::vector<double> blue_ratio;  // mean per tile, same order
  std::size_t patch_size = 0;
  std::size_t real_tiles = 0;  // tiles before padding
  std::string slide_id;
  int label = -1;
};

TileBag select_tiles(std::span<const Patch> patches, std::size_t bag_size = 36, std::size_t patch_size = 32);

/// Row-major sqrt(B) x sqrt(B) mosaic; B must be a perfect square.
RasterImage concat_bag(const TileBag& bag);
/// Tile `index` cut back out of a mosaic.
RasterImage mosaic_cell(const RasterImage& mosaic, std::size_t index, std::size_t patch_size);

/// Per mosaic cell: mean R, G, B (scaled to [0,1]) and mean blue ratio / 50.
std::vector<double> bag_features(const RasterImage& mosaic, std::size_t patch_size);
inline constexpr std::size_t kFeaturesPerCell = 4;

struct MilConfig {
  std::size_t bag_size = 36;
  std::vector<std::size_t> hidden{32};
  std::size_t num_classes = 2;

  std::size_t input_dim() const { return bag_size * kFeaturesPerCell; }
  void validate() const;

  friend bool operator==(const MilConfig&, const MilConfig&) = default;
};

class MilModel {
 public:
  MilModel(MilConfig config, std::uint64_t seed);
  MilModel(MilConfig config, ParameterSet params);

  const MilConfig& config() const { return config_; }
  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }

  Var logits(std::span<const Var> bound, const Tensor& features) const;

  friend bool operator==(const MilModel&, const MilModel&) = default;

 private:
  MilConfig config_;
  ParameterSet params_;
};

struct TrainResult {
  MilModel model;
  LossCurve curve;
};

TrainResult train_baseline(std::span<const TileBag> bags, const MilConfig& model_config, const TrainConfig& config);
std::vector<double> predict_baseline(const MilModel& model, const TileBag& bag);

Checkpoint to_checkpoint(const MilModel& model);
MilModel from_checkpoint(const Checkpoint& ckpt);

}  // namespace slidegraph::mil
