// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "oracles.hpp"
#include "slidegraph/error.hpp"
#include "slidegraph/mil.hpp"
#include "support.hpp"

namespace slidegraph::mil {
namespace {

// Random tile; `blue` pushes the blue channel up and red/green down.
RasterImage random_tile(std::size_t p, Rng& rng, int blue = 0) {
  RasterImage img(p, p);
  for (std::size_t y = 0; y < p; ++y)
    for (std::size_t x = 0; x < p; ++x) {
      const auto jitter = [&](int base) {
        return static_cast<std::uint8_t>(std::clamp(base + static_cast<int>(rng.below(60)), 0, 255));
      };
      img.set_pixel(x, y, {jitter(170 - blue), jitter(120 - blue), jitter(150 + blue)});
    }
  return img;
}

std::vector<Patch> random_patches(std::size_t n, std::size_t p, Rng& rng, int blue = 0) {
  std::vector<Patch> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back({random_tile(p, rng, blue), i / 9, i % 9, tile_centroid(i / 9, i % 9, p), 1.0});
  return out;
}

TEST(SelectTiles, TopThirtySixOfForty) {
  Rng rng(61);
  const auto patches = random_patches(40, 8, rng);
  const TileBag bag = select_tiles(patches, 36, 8);
  ASSERT_EQ(bag.tiles.size(), 36u);
  EXPECT_EQ(bag.real_tiles, 36u);
  const auto order = oracle::top_blue_ratio(patches, 36);
  for (std::size_t i = 0; i < 36; ++i) EXPECT_EQ(bag.tiles[i], patches[order[i]].pixels) << i;
  for (std::size_t i = 1; i < 36; ++i) EXPECT_GE(bag.blue_ratio[i - 1], bag.blue_ratio[i]);
}

TEST(SelectTiles, PadsWithWhite) {
  Rng rng(62);
  const auto patches = random_patches(10, 8, rng);
  const TileBag bag = select_tiles(patches, 36, 8);
  ASSERT_EQ(bag.tiles.size(), 36u);
  EXPECT_EQ(bag.real_tiles, 10u);
  for (std::size_t i = 10; i < 36; ++i) EXPECT_EQ(bag.tiles[i], RasterImage(8, 8, Rgb{255, 255, 255}));
  EXPECT_NEAR(bag.blue_ratio.back(), oracle::blue_ratio(255, 255, 255), 1e-12);
  const TileBag empty = select_tiles(std::span<const Patch>{}, 4, 8);
  EXPECT_EQ(empty.tiles.size(), 4u);
  EXPECT_EQ(empty.real_tiles, 0u);
}

TEST(SelectTiles, TiesGoToLowerGridPosition) {
  // Same R+G and B, so the blue ratio is exactly equal while pixels differ.
  const RasterImage first(8, 8, Rgb{100, 50, 200}), second(8, 8, Rgb{50, 100, 200});
  const std::vector<Patch> patches{{first, 2, 1, {}, 1.0}, {second, 0, 5, {}, 1.0}, {first, 3, 0, {}, 1.0}};
  const TileBag bag = select_tiles(patches, 4, 8);
  EXPECT_EQ(bag.blue_ratio[0], bag.blue_ratio[1]);
  EXPECT_EQ(bag.tiles[0], second);
  EXPECT_EQ(bag.tiles[1], first);
  EXPECT_EQ(oracle::top_blue_ratio(patches, 3), (std::vector<std::size_t>{1, 0, 2}));
}

TEST(SelectTiles, PermutedInputGivesSameBag) {
  Rng rng(64);
  const auto patches = random_patches(50, 8, rng);
  const TileBag bag = select_tiles(patches, 36, 8);
  for (int trial = 0; trial < 5; ++trial) {
    const auto perm = testing::random_permutation(patches.size(), rng);
    std::vector<Patch> shuffled;
    for (std::size_t i : perm) shuffled.push_back(patches[i]);
    EXPECT_EQ(select_tiles(shuffled, 36, 8).tiles, bag.tiles);
  }
}

TEST(ConcatBag, LayoutAndRecovery) {
  Rng rng(65);
  const TileBag bag = select_tiles(random_patches(36, 32, rng), 36, 32);
  const RasterImage mosaic = concat_bag(bag);
  ASSERT_EQ(mosaic.width(), 192u);
  ASSERT_EQ(mosaic.height(), 192u);
  EXPECT_EQ(mosaic.crop(0, 0, 32, 32), bag.tiles[0]);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t x = rng.below(192), y = rng.below(192);
    const RasterImage& tile = bag.tiles[(y / 32) * 6 + x / 32];
    ASSERT_EQ(mosaic.pixel(x, y), tile.pixel(x % 32, y % 32));
  }
  for (std::size_t i = 0; i < 36; ++i) EXPECT_EQ(mosaic_cell(mosaic, i, 32), bag.tiles[i]);
}

TEST(ConcatBag, NonSquareBagIsRejected) {
  Rng rng(66);
  const TileBag bag = select_tiles(random_patches(8, 8, rng), 8, 8);
  EXPECT_THROW(concat_bag(bag), ContractViolation);
}

TEST(BagFeatures, PerCellMeans) {
  Rng rng(67);
  const TileBag bag = select_tiles(random_patches(4, 8, rng), 4, 8);
  const RasterImage mosaic = concat_bag(bag);
  const auto f = bag_features(mosaic, 8);
  ASSERT_EQ(f.size(), 4 * kFeaturesPerCell);
  for (std::size_t cell = 0; cell < 4; ++cell) {
    double r = 0, g = 0, b = 0, br = 0;
    const RasterImage& t = bag.tiles[cell];
    for (std::size_t y = 0; y < 8; ++y)
      for (std::size_t x = 0; x < 8; ++x) {
        r += t.at(x, y, 0);
        g += t.at(x, y, 1);
        b += t.at(x, y, 2);
        br += oracle::blue_ratio(t.at(x, y, 0), t.at(x, y, 1), t.at(x, y, 2));
      }
    EXPECT_NEAR(f[cell * 4 + 0], r / 64.0 / 255.0, 1e-12);
    EXPECT_NEAR(f[cell * 4 + 1], g / 64.0 / 255.0, 1e-12);
    EXPECT_NEAR(f[cell * 4 + 2], b / 64.0 / 255.0, 1e-12);
    EXPECT_NEAR(f[cell * 4 + 3], br / 64.0 / 50.0, 1e-12);
  }
}

std::vector<TileBag> separable_bags(std::size_t count, Rng& rng) {
  std::vector<TileBag> bags;
  for (std::size_t i = 0; i < count; ++i) {
    const int label = static_cast<int>(i % 2);
    TileBag bag = select_tiles(random_patches(20 + rng.below(20), 8, rng, label ? 40 : 0), 36, 8);
    bag.label = label;
    bag.slide_id = "bag" + std::to_string(i);
    bags.push_back(std::move(bag));
  }
  return bags;
}

TEST(Baseline, SeparableBagsReachLowLoss) {
  Rng rng(68);
  const auto bags = separable_bags(40, rng);
  int passed = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    TrainConfig tc;
    tc.epochs = 10;
    tc.lr = 1e-3;
    tc.seed = seed;
    const TrainResult r = train_baseline(bags, MilConfig{}, tc);
    if (r.curve.epoch_loss.back() < 0.4) ++passed;
    const auto p = predict_baseline(r.model, bags[1]);
    EXPECT_NEAR(p[0] + p[1], 1.0, 1e-12);
  }
  EXPECT_GE(passed, 4);
}

TEST(Baseline, DeterministicInertAtZeroLrAndCheckpointable) {
  Rng rng(69);
  const auto bags = separable_bags(8, rng);
  TrainConfig tc;
  tc.epochs = 2;
  tc.lr = 1e-3;
  tc.seed = 3;
  const TrainResult a = train_baseline(bags, MilConfig{}, tc);
  EXPECT_EQ(a.model, train_baseline(bags, MilConfig{}, tc).model);
  tc.lr = 0.0;
  EXPECT_EQ(train_baseline(bags, MilConfig{}, tc).model, MilModel(MilConfig{}, 3));

  testing::TempDir dir;
  save_checkpoint(dir / "b.ckpt", to_checkpoint(a.model));
  const MilModel back = from_checkpoint(load_checkpoint(dir / "b.ckpt"));
  EXPECT_EQ(back, a.model);
  EXPECT_EQ(predict_baseline(back, bags[0]), predict_baseline(a.model, bags[0]));

  auto bad = bags;
  bad[0].label = 2;
  EXPECT_THROW(train_baseline(bad, MilConfig{}, tc), ContractViolation);
}

}  // namespace
}  // namespace slidegraph::mil
