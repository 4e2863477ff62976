// SPDX-License-Identifier: Apache-2.0
#include "slidegraph/wsigraph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "slidegraph/binary_io.hpp"
#include "slidegraph/error.hpp"

namespace slidegraph {

std::vector<Edge> knn_graph(std::span<const Point2> points, std::size_t k) {
  require(!points.empty(), "knn_graph needs at least one point");
  require(k >= 1, "knn_graph needs k >= 1");
  const std::size_t n = points.size();
  const std::size_t take = std::min(k, n - 1);
  std::vector<Edge> edges;
  edges.reserve(n * take);
  std::vector<std::pair<double, std::size_t>> cand;
  cand.reserve(n);
  for (std::size_t u = 0; u < n; ++u) {
    cand.clear();
    for (std::size_t v = 0; v < n; ++v) {
      if (v == u) continue;
      const double dx = points[u].x - points[v].x;
      const double dy = points[u].y - points[v].y;
      cand.emplace_back(dx * dx + dy * dy, v);
    }
    // Pair ordering gives (distance, index): ties resolve to the lower index.
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take), cand.end());
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t v = cand[i].second;
      edges.push_back({std::min(u, v), std::max(u, v)});
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

SparseMatrix NormalizedAdjacency::matrix() const { return SparseMatrix::from_entries(n, n, entries); }

NormalizedAdjacency normalize_adjacency(std::span<const Edge> edges, std::size_t n, bool with_self_loops) {
  NormalizedAdjacency a;
  a.n = n;
  a.degree.assign(n, with_self_loops ? 1 : 0);
  for (const Edge& e : edges) {
    require(e.u < n && e.v < n, "edge endpoint out of range");
    require(e.u != e.v, "self edges are not allowed in the edge list");
    ++a.degree[e.u];
    ++a.degree[e.v];
  }
  auto weight = [&](std::size_t u, std::size_t v) {
    return 1.0 / std::sqrt(static_cast<double>(a.degree[u]) * static_cast<double>(a.degree[v]));
  };
  for (const Edge& e : edges) {
    a.entries.push_back({e.u, e.v, weight(e.u, e.v)});
    a.entries.push_back({e.v, e.u, weight(e.v, e.u)});
  }
  if (with_self_loops)
    for (std::size_t u = 0; u < n; ++u) a.entries.push_back({u, u, weight(u, u)});
  std::sort(a.entries.begin(), a.entries.end(), [](const auto& x, const auto& y) {
    return x.row != y.row ? x.row < y.row : x.col < y.col;
  });
  return a;
}

SparseMatrix adjacency_matrix(std::span<const Edge> edges, std::size_t n) {
  std::vector<SparseMatrix::Entry> entries;
  entries.reserve(2 * edges.size());
  for (const Edge& e : edges) {
    require(e.u < n && e.v < n && e.u != e.v, "invalid edge for adjacency matrix");
    entries.push_back({e.u, e.v, 1.0});
    entries.push_back({e.v, e.u, 1.0});
  }
  return SparseMatrix::from_entries(n, n, std::move(entries));
}

void WSIGraph::validate() const {
  const std::size_t n = node_count();
  require(n >= 1, "graph has no nodes");
  require(features.rank() == 2 && features.rows() == n,
          [&] { return "graph feature rows " + shape_string(features.shape()) + " do not match " +
                       std::to_string(n) + " nodes"; });
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Edge& e = edges[i];
    require(e.u < e.v, "graph edges must satisfy u < v (no self edges)");
    require(e.v < n, "graph edge endpoint out of range");
    require(i == 0 || edges[i - 1] < e, "graph edges must be sorted and unique");
  }
}

WSIGraph build_slide_graph(const Tensor& features, std::span<const Point2> centroids, std::size_t k,
                           std::int32_t label) {
  if (centroids.empty()) throw EmptySlideError();
  require(features.rank() == 2 && features.rows() == centroids.size(),
          [&] { return "feature count " + std::to_string(features.rank() == 2 ? features.rows() : 0) +
              " does not match patch count " + std::to_string(centroids.size()); });
  WSIGraph g;
  g.centroids.assign(centroids.begin(), centroids.end());
  g.features = features;
  g.edges = knn_graph(centroids, k);
  g.label = label;
  g.k = k;
  return g;
}

WSIGraph build_slide_graph(const Tensor& features, std::span<const Patch> patches, std::size_t k,
                           std::int32_t label) {
  std::vector<Point2> c;
  c.reserve(patches.size());
  for (const Patch& p : patches) c.push_back(p.centroid);
  return build_slide_graph(features, c, k, label);
}

std::size_t component_count(std::span<const Edge> edges, std::size_t n) {
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t components = n;
  for (const Edge& e : edges) {
    const std::size_t a = find(e.u), b = find(e.v);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components;
}

namespace {
constexpr std::string_view kMagic{"SGGRAPH\0", 8};
}

std::vector<std::uint8_t> encode_graph(const WSIGraph& g) {
  g.validate();
  io::Writer w;
  w.raw(kMagic);
  w.u32(WSIGraph::kVersion);
  w.u64(g.node_count());
  w.u64(g.feature_dim());
  w.u32(static_cast<std::uint32_t>(g.k));
  w.i32(g.label);
  w.str(g.tap);
  w.str(g.slide_id);
  w.u64(g.config_hash);
  w.u64(g.edges.size());
  for (const Point2& p : g.centroids) {
    w.f64(p.x);
    w.f64(p.y);
  }
  for (double v : g.features.data()) w.f64(v);
  for (const Edge& e : g.edges) {
    w.u64(e.u);
    w.u64(e.v);
  }
  return w.bytes();
}

WSIGraph decode_graph(std::vector<std::uint8_t> bytes, const std::string& origin) {
  io::Reader r(std::move(bytes), origin);
  r.expect_magic(kMagic);
  r.expect_version(WSIGraph::kVersion, "graph");
  WSIGraph g;
  const std::uint64_t n = r.u64();
  const std::uint64_t d = r.u64();
  if (n == 0 || d == 0) throw FormatError("graph with zero nodes or zero feature dimension: " + origin);
  g.k = r.u32();
  g.label = r.i32();
  g.tap = r.str();
  g.slide_id = r.str();
  g.config_hash = r.u64();
  const std::uint64_t m = r.u64();
  g.centroids.resize(n);
  for (Point2& p : g.centroids) {
    p.x = r.f64();
    p.y = r.f64();
  }
  std::vector<double> feats(n * d);
  for (double& v : feats) v = r.f64();
  g.features = Tensor({n, d}, std::move(feats));
  for (std::uint64_t i = 0; i < m; ++i) {
    Edge e;
    e.u = r.u64();
    e.v = r.u64();
    g.edges.push_back(e);
  }
  r.expect_end();
  try {
    g.validate();
  } catch (const ContractViolation& e) {
    throw FormatError(std::string("invalid graph file ") + origin + ": " + e.what());
  }
  return g;
}

void save_graph(const std::filesystem::path& path, const WSIGraph& graph) {
  const auto bytes = encode_graph(graph);
  io::write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

WSIGraph load_graph(const std::filesystem::path& path) { return decode_graph(io::read_file(path), path.string()); }

}  // namespace slidegraph
