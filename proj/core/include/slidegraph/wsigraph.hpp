// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "slidegraph/autodiff.hpp"
#include "slidegraph/tensor.hpp"
#include "slidegraph/tissue.hpp"

namespace slidegraph {

/// Undirected edge stored with u < v.
struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Exact k-nearest-neighbour graph over 2-D points. Each node links to its k
/// nearest other nodes (Euclidean; ties to the lower index); directed lists
/// are symmetrised by union. k >= n links every pair. Sorted edge list.
std::vector<Edge> knn_graph(std::span<const Point2> points, std::size_t k);

/// Entries (u, v, 1/sqrt(deg u * deg v)) in both directions for every edge,
/// plus (u, u, 1/deg u) when self-loops are enabled (degrees then count the
/// loop). Sorted by (u, v).
struct NormalizedAdjacency {
  std::size_t n = 0;
  std::vector<SparseMatrix::Entry> entries;
  std::vector<std::size_t> degree;

  SparseMatrix matrix() const;
};

NormalizedAdjacency normalize_adjacency(std::span<const Edge> edges, std::size_t n, bool with_self_loops = true);

/// 0/1 symmetric adjacency without self-loops.
SparseMatrix adjacency_matrix(std::span<const Edge> edges, std::size_t n);

struct WSIGraph {
  static constexpr std::uint32_t kVersion = 1;

  std::vector<Point2> centroids;
  Tensor features;  // [n, d]
  std::vector<Edge> edges;
  std::int32_t label = -1;
  std::string slide_id;
  std::string tap;
  std::size_t k = 0;
  std::uint64_t config_hash = 0;

  std::size_t node_count() const { return centroids.size(); }
  std::size_t feature_dim() const { return features.cols(); }
  /// Throws ContractViolation on any broken invariant.
  void validate() const;

  friend bool operator==(const WSIGraph&, const WSIGraph&) = default;
};

/// Throws EmptySlideError for zero patches and ContractViolation when the
/// feature row count differs from the patch count.
WSIGraph build_slide_graph(const Tensor& features, std::span<const Point2> centroids, std::size_t k,
                           std::int32_t label);
WSIGraph build_slide_graph(const Tensor& features, std::span<const Patch> patches, std::size_t k,
                           std::int32_t label);

/// Number of connected components (union-find).
std::size_t component_count(std::span<const Edge> edges, std::size_t n);

/// Graph file:
///   magic "SGGRAPH\0" | u32 version (=1) | u64 n | u64 d | u32 k | i32 label
///   | str tap | str slide_id | u64 config_hash | u64 edge_count
///   | f64 (x, y)[n] | f64 features[n*d] | u64 (u, v)[edge_count], u < v
std::vector<std::uint8_t> encode_graph(const WSIGraph& graph);
WSIGraph decode_graph(std::vector<std::uint8_t> bytes, const std::string& origin = {});
void save_graph(const std::filesystem::path& path, const WSIGraph& graph);
WSIGraph load_graph(const std::filesystem::path& path);

}  // namespace slidegraph
