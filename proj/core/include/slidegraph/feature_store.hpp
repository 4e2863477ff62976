// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "slidegraph/tensor.hpp"
#include "slidegraph/tissue.hpp"

namespace slidegraph {

/// Per-slide patch features for one encoder tap.
///
///   magic "SGFEAT\0\0" | u32 version (=1) | u64 config_hash | str slide_id
///   i32 label | str tap | u32 dim | u32 count
///   { u32 grid_row | u32 grid_col | f64 cx | f64 cy | f64 feature[dim] }*
struct FeatureRecord {
  std::size_t grid_row = 0;
  std::size_t grid_col = 0;
  Point2 centroid;
  std::vector<double> features;

  friend bool operator==(const FeatureRecord&, const FeatureRecord&) = default;
};

struct FeatureStore {
  static constexpr std::uint32_t kVersion = 1;

  std::uint64_t config_hash = 0;
  std::string slide_id;
  std::int32_t label = -1;
  std::string tap;
  std::size_t dim = 0;
  std::vector<FeatureRecord> records;

  /// Features as an [n, dim] matrix (n >= 1).
  Tensor matrix() const;
  std::vector<Point2> centroids() const;

  friend bool operator==(const FeatureStore&, const FeatureStore&) = default;
};

/// Pair patch metadata with the rows of `features`.
FeatureStore make_feature_store(const std::vector<Patch>& patches, const Tensor& features, std::string tap);

void save_feature_store(const std::filesystem::path& path, const FeatureStore& store);
FeatureStore load_feature_store(const std::filesystem::path& path);

}  // namespace slidegraph
