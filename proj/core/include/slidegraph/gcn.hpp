// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "slidegraph/autodiff.hpp"
#include "slidegraph/checkpoint.hpp"
#include "slidegraph/params.hpp"
#include "slidegraph/trainer.hpp"
#include "slidegraph/wsigraph.hpp"

namespace slidegraph::gcn {

enum class LayerKind {
  /// relu(A_norm H W), symmetric degree normalisation.
  Gcn,
  /// relu(A H W_neigh + H W_self + b), raw adjacency.
  Basic,
};

struct GCNConfig {
  std::size_t input_dim = 0;
  std::vector<std::size_t> layer_widths{128, 128};
  /// Empty means every layer is LayerKind::Gcn.
  std::vector<LayerKind> layer_kinds;
  std::vector<std::size_t> head_widths{64};
  std::size_t num_classes = 2;
  bool self_loops = true;

  LayerKind kind(std::size_t layer) const;
  void validate() const;
  friend bool operator==(const GCNConfig&, const GCNConfig&) = default;
};

Var gcn_layer(Var h, const SparseMatrix& normalized_adjacency, Var w);
Var basic_gnn_layer(Var h, const SparseMatrix& adjacency, Var w_self, Var w_neigh, Var b);

/// Graph with its propagation operators precomputed for repeated passes.
struct PreparedGraph {
  SparseMatrix normalized;
  SparseMatrix adjacency;
  Tensor features;
  std::int32_t label = -1;
};

PreparedGraph prepare(const WSIGraph& graph, const GCNConfig& config);

class GCNModel {
 public:
  GCNModel(GCNConfig config, std::uint64_t seed);
  GCNModel(GCNConfig config, ParameterSet params);

  const GCNConfig& config() const { return config_; }
  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }

  /// [1, C] logits on the tape.
  Var logits(std::span<const Var> bound, const PreparedGraph& graph) const;
  /// Pooled slide embedding (mean over the last GCN layer's node rows).
  Var pooled(std::span<const Var> bound, const PreparedGraph& graph) const;

  friend bool operator==(const GCNModel&, const GCNModel&) = default;

 private:
  GCNConfig config_;
  ParameterSet params_;
};

/// Class probabilities (softmax of the logits).
std::vector<double> forward(const WSIGraph& graph, const GCNModel& model);
std::vector<double> forward(const PreparedGraph& graph, const GCNModel& model);

struct TrainResult {
  GCNModel model;
  LossCurve curve;
};

/// Cross-entropy per slide, one Adam step per graph, cosine schedule over all
/// steps. The model is initialised from config.seed.
TrainResult train(std::span<const WSIGraph> graphs, const GCNConfig& model_config, const TrainConfig& config);

/// Arithmetic mean of per-model probabilities; graphs[i] is the variant fed to models[i].
std::vector<double> ensemble_predict(std::span<const GCNModel> models, std::span<const WSIGraph> graphs);
std::vector<double> ensemble_mean(std::span<const std::vector<double>> probabilities);

std::size_t argmax(std::span<const double> v);

Checkpoint to_checkpoint(const GCNModel& model);
GCNModel from_checkpoint(const Checkpoint& ckpt);

}  // namespace slidegraph::gcn
