// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace slidegraph::app {

/// A stage refused to run: missing or incompatible inputs.
class PipelineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using HashCheck = std::function<void(std::uint64_t found, const std::filesystem::path& artifact)>;

struct Options {
  std::filesystem::path out = "slidegraph_out";
  /// Skip a stage whose recorded outputs exist and carry the current config hash.
  bool resume = false;
  /// Accept inputs produced under a different config hash.
  bool force = false;
  std::ostream* log = nullptr;  // defaults to std::clog
};

struct ModelScore {
  std::string model;
  double kappa = 0.0;
  double accuracy = 0.0;
  std::size_t slides = 0;
};

struct Evaluation {
  std::vector<ModelScore> scores;
  /// Throws PipelineError for an unknown model name.
  const ModelScore& at(const std::string& model) const;
};

/// Stage-per-command pipeline over one artifact directory:
///
///   manifest.tsv, slides/<id>.ppm        synth
///   masks/<id>.ppm                       segment
///   patches/<id>.patches                 patch
///   models/encoder.ckpt, encoder.log     pretrain
///   features/{small,large}/<id>.feat     featurize
///   graphs/{small,large}/<id>.graph      graph
///   models/gcn_{small,large}.ckpt/.log   train-gcn
///   models/baseline.ckpt/.log            train-baseline
///   reports/metrics_<model>.txt          evaluate
///   reports/*.csv, reports/*.svg         report
///   stamps/<stage>                       completion records for --resume
class Pipeline {
 public:
  Pipeline(RunConfig config, Options options);

  const RunConfig& config() const { return config_; }
  std::uint64_t config_hash() const { return hash_; }
  const std::filesystem::path& out() const { return options_.out; }

  void synth();
  void segment();
  void patch();
  void pretrain();
  void featurize();
  void graph();
  void train_gcn();
  void train_baseline();
  Evaluation evaluate();
  void report();
  /// Every stage in order; returns the evaluation.
  Evaluation run_all();

  static const std::vector<std::string>& model_names();

 private:
  std::ostream& log() const;
  bool up_to_date(const std::string& stage) const;
  void stamp(const std::string& stage, const std::vector<std::filesystem::path>& outputs) const;
  void check_hash(std::uint64_t found, const std::filesystem::path& artifact) const;
  HashCheck hash_check() const;

  RunConfig config_;
  Options options_;
  std::uint64_t hash_;
};

}  // namespace slidegraph::app
