// SPDX-License-Identifier: Apache-2.0
#include "slidegraph/gcn.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "slidegraph/error.hpp"
#include "slidegraph/rng.hpp"

namespace slidegraph::gcn {

LayerKind GCNConfig::kind(std::size_t layer) const {
  return layer_kinds.empty() ? LayerKind::Gcn : layer_kinds.at(layer);
}

void GCNConfig::validate() const {
  require(input_dim > 0, "GCN input_dim must be positive");
  require(num_classes >= 2, "GCN needs at least two classes");
  require(layer_kinds.empty() || layer_kinds.size() == layer_widths.size(),
          "GCN layer_kinds must be empty or match layer_widths");
  for (std::size_t w : layer_widths) require(w > 0, "GCN layer widths must be positive");
  for (std::size_t w : head_widths) require(w > 0, "GCN head widths must be positive");
}

Var gcn_layer(Var h, const SparseMatrix& normalized_adjacency, Var w) {
  require(h.value().rank() == 2 && w.value().rank() == 2 && h.value().cols() == w.value().rows(),
          [&] { return "gcn_layer: features " + shape_string(h.shape()) + " incompatible with weight " +
                       shape_string(w.shape()); });
  require(normalized_adjacency.rows == h.value().rows(), "gcn_layer: adjacency size differs from node count");
  return relu(matmul(spmm(normalized_adjacency, h), w));
}

Var basic_gnn_layer(Var h, const SparseMatrix& adjacency, Var w_self, Var w_neigh, Var b) {
  const Tensor& hv = h.value();
  require(hv.rank() == 2 && w_self.value().rank() == 2 && w_neigh.value().same_shape(w_self.value()) &&
              hv.cols() == w_self.value().rows() && b.value().size() == w_self.value().cols(),
          "basic_gnn_layer: dimension mismatch");
  require(adjacency.rows == hv.rows(), "basic_gnn_layer: adjacency size differs from node count");
  Var neigh = matmul(spmm(adjacency, h), w_neigh);
  Var self = matmul(h, w_self);
  return relu(add_bias(add(neigh, self), b));
}

PreparedGraph prepare(const WSIGraph& graph, const GCNConfig& config) {
  graph.validate();
  require(graph.feature_dim() == config.input_dim,
          [&] { return "graph feature dimension " + std::to_string(graph.feature_dim()) +
                       " differs from model input dimension " +
              std::to_string(config.input_dim); });
  PreparedGraph p;
  p.normalized = normalize_adjacency(graph.edges, graph.node_count(), config.self_loops).matrix();
  p.adjacency = adjacency_matrix(graph.edges, graph.node_count());
  p.features = graph.features;
  p.label = graph.label;
  return p;
}

namespace {

std::string layer_name(std::size_t i, const char* part) { return "layer." + std::to_string(i) + "." + part; }
std::string head_name(std::size_t i, const char* part) { return "head." + std::to_string(i) + "." + part; }

ParameterSet init_params(const GCNConfig& c, std::uint64_t seed) {
  c.validate();
  Rng rng(mix_seed(seed, 0x6C4));
  ParameterSet p;
  auto he = [&](std::size_t fan_in, std::size_t fan_out) {
    return Tensor::uniform({fan_in, fan_out}, std::sqrt(6.0 / static_cast<double>(fan_in)), rng);
  };
  std::size_t d = c.input_dim;
  for (std::size_t i = 0; i < c.layer_widths.size(); ++i) {
    const std::size_t w = c.layer_widths[i];
    if (c.kind(i) == LayerKind::Gcn) {
      p.add(layer_name(i, "weight"), he(d, w));
    } else {
      p.add(layer_name(i, "w_self"), he(d, w));
      p.add(layer_name(i, "w_neigh"), he(d, w));
      p.add(layer_name(i, "bias"), Tensor({w}, 0.0));
    }
    d = w;
  }
  for (std::size_t i = 0; i < c.head_widths.size(); ++i) {
    p.add(head_name(i, "weight"), he(d, c.head_widths[i]));
    p.add(head_name(i, "bias"), Tensor({c.head_widths[i]}, 0.0));
    d = c.head_widths[i];
  }
  p.add("out.weight", Tensor::uniform({d, c.num_classes}, std::sqrt(3.0 / static_cast<double>(d)), rng));
  p.add("out.bias", Tensor({c.num_classes}, 0.0));
  return p;
}

}  // namespace

GCNModel::GCNModel(GCNConfig config, std::uint64_t seed)
    : config_(std::move(config)), params_(init_params(config_, seed)) {}

GCNModel::GCNModel(GCNConfig config, ParameterSet params) : config_(std::move(config)), params_(std::move(params)) {
  require(params_.same_layout(init_params(config_, 0)), "GCN parameters do not match the configuration");
}

Var GCNModel::pooled(std::span<const Var> bound, const PreparedGraph& graph) const {
  require(bound.size() == params_.size(), "GCN forward: wrong number of bound parameters");
  require(graph.features.cols() == config_.input_dim,
          [&] { return "GCN forward: graph feature dimension " + std::to_string(graph.features.cols()) +
              " differs from model input dimension " + std::to_string(config_.input_dim); });
  Tape& tape = *bound[0].tape();
  Var h = tape.constant(graph.features);
  std::size_t k = 0;
  for (std::size_t i = 0; i < config_.layer_widths.size(); ++i) {
    if (config_.kind(i) == LayerKind::Gcn) {
      h = gcn_layer(h, graph.normalized, bound[k++]);
    } else {
      h = basic_gnn_layer(h, graph.adjacency, bound[k], bound[k + 1], bound[k + 2]);
      k += 3;
    }
  }
  return mean(h, 0);
}

Var GCNModel::logits(std::span<const Var> bound, const PreparedGraph& graph) const {
  Var z = pooled(bound, graph);
  std::size_t k = bound.size() - 2 * (config_.head_widths.size() + 1);
  for (std::size_t i = 0; i < config_.head_widths.size(); ++i, k += 2)
    z = relu(add_bias(matmul(z, bound[k]), bound[k + 1]));
  return add_bias(matmul(z, bound[k]), bound[k + 1]);
}

std::vector<double> forward(const PreparedGraph& graph, const GCNModel& model) {
  Tape tape;
  std::vector<Var> bound = model.params().bind_constant(tape);
  Tensor p = softmax_rows(model.logits(bound, graph).value());
  return {p.data().begin(), p.data().end()};
}

std::vector<double> forward(const WSIGraph& graph, const GCNModel& model) {
  return forward(prepare(graph, model.config()), model);
}

TrainResult train(std::span<const WSIGraph> graphs, const GCNConfig& model_config, const TrainConfig& config) {
  require(!graphs.empty(), "GCN training needs at least one graph");
  std::vector<PreparedGraph> prepared;
  prepared.reserve(graphs.size());
  for (const WSIGraph& g : graphs) {
    require(g.label >= 0 && static_cast<std::size_t>(g.label) < model_config.num_classes,
            [&] { return "graph label " + std::to_string(g.label) + " out of range for " +
                std::to_string(model_config.num_classes) + " classes"; });
    prepared.push_back(prepare(g, model_config));
  }
  GCNModel model(model_config, config.seed);
  LossCurve curve = fit_per_sample(model.params(), prepared.size(), config,
                                   [&](Tape&, std::span<const Var> bound, std::size_t i) {
                                     const PreparedGraph& g = prepared[i];
                                     return softmax_cross_entropy(model.logits(bound, g),
                                                                  static_cast<std::size_t>(g.label));
                                   });
  return {std::move(model), std::move(curve)};
}

std::vector<double> ensemble_mean(std::span<const std::vector<double>> probabilities) {
  require(!probabilities.empty(), "ensemble needs at least one member");
  const std::size_t c = probabilities[0].size();
  std::vector<double> mean(c, 0.0);
  for (const auto& p : probabilities) {
    require(p.size() == c, [&] { return "ensemble members disagree on class count: " + std::to_string(c) + " vs " +
                               std::to_string(p.size()); });
    for (std::size_t j = 0; j < c; ++j) mean[j] += p[j];
  }
  for (double& v : mean) v /= static_cast<double>(probabilities.size());
  return mean;
}

std::vector<double> ensemble_predict(std::span<const GCNModel> models, std::span<const WSIGraph> graphs) {
  require(!models.empty(), "ensemble needs at least one model");
  require(models.size() == graphs.size(), "ensemble needs one graph variant per model");
  std::vector<std::vector<double>> probs;
  for (std::size_t i = 0; i < models.size(); ++i) {
    require(models[i].config().num_classes == models[0].config().num_classes,
            [&] { return "ensemble members disagree on class count: " + std::to_string(models[0].config().num_classes) +
                " vs " + std::to_string(models[i].config().num_classes); });
    probs.push_back(forward(graphs[i], models[i]));
  }
  return ensemble_mean(probs);
}

std::size_t argmax(std::span<const double> v) {
  require(!v.empty(), "argmax of an empty vector");
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

namespace {

std::string join_widths(const std::vector<std::size_t>& w) {
  std::ostringstream os;
  for (std::size_t i = 0; i < w.size(); ++i) os << (i ? "," : "") << w[i];
  return os.str();
}

std::vector<std::size_t> split_widths(const std::string& s) {
  std::vector<std::size_t> out;
  std::istringstream is(s);
  std::string item;
  while (std::getline(is, item, ','))
    if (!item.empty()) out.push_back(std::stoul(item));
  return out;
}

}  // namespace

Checkpoint to_checkpoint(const GCNModel& model) {
  const GCNConfig& c = model.config();
  Checkpoint ck;
  ck.meta["model"] = "gcn";
  ck.meta["gcn.input_dim"] = std::to_string(c.input_dim);
  ck.meta["gcn.layer_widths"] = join_widths(c.layer_widths);
  std::string kinds;
  for (std::size_t i = 0; i < c.layer_widths.size(); ++i)
    kinds += std::string(i ? "," : "") + (c.kind(i) == LayerKind::Gcn ? "gcn" : "basic");
  ck.meta["gcn.layer_kinds"] = kinds;
  ck.meta["gcn.head_widths"] = join_widths(c.head_widths);
  ck.meta["gcn.num_classes"] = std::to_string(c.num_classes);
  ck.meta["gcn.self_loops"] = c.self_loops ? "1" : "0";
  ck.params = model.params();
  return ck;
}

GCNModel from_checkpoint(const Checkpoint& ck) {
  auto get = [&](const std::string& key) {
    auto it = ck.meta.find(key);
    if (it == ck.meta.end()) throw FormatError("GCN checkpoint lacks metadata key " + key);
    return it->second;
  };
  if (get("model") != "gcn") throw FormatError("checkpoint does not hold a GCN model");
  GCNConfig c;
  try {
    c.input_dim = std::stoul(get("gcn.input_dim"));
    c.layer_widths = split_widths(get("gcn.layer_widths"));
    c.head_widths = split_widths(get("gcn.head_widths"));
    c.num_classes = std::stoul(get("gcn.num_classes"));
  } catch (const std::logic_error&) {
    throw FormatError("GCN checkpoint has malformed metadata");
  }
  c.self_loops = get("gcn.self_loops") == "1";
  std::istringstream kinds(get("gcn.layer_kinds"));
  std::string kind;
  while (std::getline(kinds, kind, ',')) {
    if (kind == "gcn")
      c.layer_kinds.push_back(LayerKind::Gcn);
    else if (kind == "basic")
      c.layer_kinds.push_back(LayerKind::Basic);
    else if (!kind.empty())
      throw FormatError("unknown GCN layer kind " + kind);
  }
  return GCNModel(c, ck.params);
}

}  // namespace slidegraph::gcn
