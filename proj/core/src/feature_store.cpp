// SPDX-License-Identifier: Apache-2.0
#include "slidegraph/feature_store.hpp"

#include "slidegraph/binary_io.hpp"
#include "slidegraph/error.hpp"

namespace slidegraph {
namespace {
constexpr std::string_view kMagic{"SGFEAT\0\0", 8};
}

Tensor FeatureStore::matrix() const {
  require(!records.empty(), "feature store has no records");
  Tensor m({records.size(), dim});
  for (std::size_t i = 0; i < records.size(); ++i) {
    require(records[i].features.size() == dim, "feature record dimension mismatch");
    std::copy(records[i].features.begin(), records[i].features.end(), m.row(i).begin());
  }
  return m;
}

std::vector<Point2> FeatureStore::centroids() const {
  std::vector<Point2> c;
  c.reserve(records.size());
  for (const auto& r : records) c.push_back(r.centroid);
  return c;
}

FeatureStore make_feature_store(const std::vector<Patch>& patches, const Tensor& features, std::string tap) {
  require(features.rank() == 2 && features.rows() == patches.size(),
          [&] { return "feature rows (" + shape_string(features.shape()) + ") do not align with " +
              std::to_string(patches.size()) + " patches"; });
  FeatureStore s;
  s.tap = std::move(tap);
  s.dim = features.cols();
  for (std::size_t i = 0; i < patches.size(); ++i) {
    const auto row = features.row(i);
    s.records.push_back({patches[i].grid_row, patches[i].grid_col, patches[i].centroid, {row.begin(), row.end()}});
  }
  return s;
}

void save_feature_store(const std::filesystem::path& path, const FeatureStore& store) {
  io::Writer w;
  w.raw(kMagic);
  w.u32(FeatureStore::kVersion);
  w.u64(store.config_hash);
  w.str(store.slide_id);
  w.i32(store.label);
  w.str(store.tap);
  w.u32(static_cast<std::uint32_t>(store.dim));
  w.u32(static_cast<std::uint32_t>(store.records.size()));
  for (const auto& r : store.records) {
    require(r.features.size() == store.dim, "feature record dimension mismatch");
    w.u32(static_cast<std::uint32_t>(r.grid_row));
    w.u32(static_cast<std::uint32_t>(r.grid_col));
    w.f64(r.centroid.x);
    w.f64(r.centroid.y);
    for (double v : r.features) w.f64(v);
  }
  w.save(path);
}

FeatureStore load_feature_store(const std::filesystem::path& path) {
  io::Reader r = io::Reader::open(path);
  r.expect_magic(kMagic);
  r.expect_version(FeatureStore::kVersion, "feature store");
  FeatureStore s;
  s.config_hash = r.u64();
  s.slide_id = r.str();
  s.label = r.i32();
  s.tap = r.str();
  s.dim = r.u32();
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    FeatureRecord rec;
    rec.grid_row = r.u32();
    rec.grid_col = r.u32();
    rec.centroid.x = r.f64();
    rec.centroid.y = r.f64();
    rec.features.resize(s.dim);
    for (double& v : rec.features) v = r.f64();
    s.records.push_back(std::move(rec));
  }
  r.expect_end();
  return s;
}

}  // namespace slidegraph
