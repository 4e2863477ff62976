// SPDX-License-Identifier: Apache-2.0
#include "pipeline.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

#include "plots.hpp"
#include "slidegraph/binary_io.hpp"
#include "slidegraph/checkpoint.hpp"
#include "slidegraph/error.hpp"
#include "slidegraph/feature_store.hpp"
#include "slidegraph/gcn.hpp"
#include "slidegraph/log.hpp"
#include "slidegraph/manifest.hpp"
#include "slidegraph/metrics.hpp"
#include "slidegraph/mil.hpp"
#include "slidegraph/raster.hpp"
#include "slidegraph/rng.hpp"
#include "slidegraph/ssl.hpp"
#include "slidegraph/synth.hpp"
#include "slidegraph/tissue.hpp"
#include "slidegraph/wsigraph.hpp"

namespace fs = std::filesystem;

namespace slidegraph::app {
namespace {

const std::vector<std::string> kTaps{"small", "large"};
const std::vector<std::string> kModels{"gcn_small", "gcn_large", "ensemble", "baseline"};

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::string hash_line(std::uint64_t h) { return "config_hash " + hex_hash(h); }

/// Looks for a "config_hash <hex>" line among comment lines or text.
std::optional<std::uint64_t> find_hash(const std::vector<std::string>& lines) {
  for (std::string line : lines) {
    if (!line.empty() && line[0] == '#') line.erase(0, line.find_first_not_of("# "));
    if (line.rfind("config_hash ", 0) == 0) {
      try {
        return std::stoull(line.substr(12), nullptr, 16);
      } catch (const std::logic_error&) {
        return std::nullopt;
      }
    }
  }
  return std::nullopt;
}

std::vector<std::string> text_lines(const fs::path& path) {
  const auto bytes = io::read_file(path);
  std::istringstream in(std::string(bytes.begin(), bytes.end()));
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

void require_file(const fs::path& path, const std::string& producer) {
  if (!fs::exists(path)) throw PipelineError("missing input " + path.string() + " (run '" + producer + "' first)");
}

std::string loss_log(std::uint64_t hash, const LossCurve& curve) {
  std::string s = "# " + hash_line(hash) + "\n# epoch\tloss\tlr\n";
  for (std::size_t e = 0; e < curve.epoch_loss.size(); ++e)
    s += std::to_string(e + 1) + "\t" + fmt("%.9g", curve.epoch_loss[e]) + "\t" + fmt("%.9g", curve.epoch_lr[e]) + "\n";
  return s;
}

LossCurve read_loss_log(const fs::path& path) {
  LossCurve c;
  for (const std::string& line : text_lines(path)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream in(line);
    std::size_t epoch;
    double loss, lr;
    if (!(in >> epoch >> loss >> lr)) throw FormatError("malformed metrics log line in " + path.string());
    c.epoch_loss.push_back(loss);
    c.epoch_lr.push_back(lr);
  }
  return c;
}

std::string slide_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "slide_%04zu", i);
  return buf;
}

gcn::GCNConfig gcn_config(const RunConfig& cfg, std::size_t input_dim) {
  gcn::GCNConfig c;
  c.input_dim = input_dim;
  c.layer_widths = cfg.get_sizes("gcn.layers");
  const auto kind = cfg.get("gcn.layer_kind") == "basic" ? gcn::LayerKind::Basic : gcn::LayerKind::Gcn;
  c.layer_kinds.assign(c.layer_widths.size(), kind);
  c.head_widths = cfg.get_sizes("gcn.head");
  c.num_classes = cfg.get_size("data.classes");
  c.self_loops = cfg.get_bool("gcn.self_loops");
  return c;
}

ssl::EncoderConfig encoder_config(const RunConfig& cfg) {
  ssl::EncoderConfig c;
  c.patch_size = cfg.get_size("patch.size");
  c.hidden = cfg.get_sizes("ssl.hidden");
  c.tap_small_dim = cfg.get_size("ssl.tap_small_dim");
  c.tap_large_dim = cfg.get_size("ssl.tap_large_dim");
  c.projection_dim = cfg.get_size("ssl.projection_dim");
  return c;
}

}  // namespace

const ModelScore& Evaluation::at(const std::string& model) const {
  for (const ModelScore& s : scores)
    if (s.model == model) return s;
  throw PipelineError("no evaluation for model " + model);
}

const std::vector<std::string>& Pipeline::model_names() { return kModels; }

Pipeline::Pipeline(RunConfig config, Options options)
    : config_(std::move(config)), options_(std::move(options)), hash_(config_.hash()) {
  if (config_.get_size("data.classes") < 2) throw ConfigError("data.classes must be at least 2");
  if (config_.get_size("data.slides") < config_.get_size("data.classes"))
    throw ConfigError("data.slides must cover every class");
  log() << "resolved config (" << hash_line(hash_) << ")\n";
  std::istringstream lines(config_.resolved());
  for (std::string line; std::getline(lines, line);) log() << "  " << line << "\n";
}

std::ostream& Pipeline::log() const { return options_.log ? *options_.log : std::clog; }

bool Pipeline::up_to_date(const std::string& stage) const {
  if (!options_.resume) return false;
  const fs::path stamp_path = out() / "stamps" / stage;
  if (!fs::exists(stamp_path)) return false;
  const auto lines = text_lines(stamp_path);
  if (lines.empty() || find_hash({lines[0]}) != hash_) return false;
  for (std::size_t i = 1; i < lines.size(); ++i)
    if (!lines[i].empty() && !fs::exists(out() / lines[i])) return false;
  log() << stage << ": up to date, skipping\n";
  return true;
}

void Pipeline::stamp(const std::string& stage, const std::vector<fs::path>& outputs) const {
  std::string s = hash_line(hash_) + "\n";
  for (const fs::path& p : outputs) s += fs::relative(p, out()).generic_string() + "\n";
  io::write_file_atomic(out() / "stamps" / stage, s);
}

HashCheck Pipeline::hash_check() const {
  return [this](std::uint64_t found, const fs::path& artifact) { check_hash(found, artifact); };
}

void Pipeline::check_hash(std::uint64_t found, const fs::path& artifact) const {
  if (found == hash_) return;
  const std::string msg = artifact.string() + " was produced under config hash " + hex_hash(found) +
                          ", current config hash is " + hex_hash(hash_);
  if (!options_.force) throw PipelineError(msg + " (use --force to accept)");
  log::warn(msg);
}

void Pipeline::synth() {
  if (up_to_date("synth")) return;
  const std::size_t n = config_.get_size("data.slides");
  const std::size_t classes = config_.get_size("data.classes");
  const std::size_t w = config_.get_size("data.width"), h = config_.get_size("data.height");
  const std::uint64_t seed = config_.get_u64("seed");
  const double test_fraction = config_.get_double("data.test_fraction");
  if (test_fraction < 0.0 || test_fraction >= 1.0) throw ConfigError("data.test_fraction must lie in [0, 1)");

  std::vector<ManifestEntry> entries(n);
  std::vector<fs::path> outputs;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % classes);
    const auto spec = SyntheticSlideSpec::for_class(label, mix_seed(mix_seed(seed, 0x51DE), i), w, h);
    const fs::path rel = fs::path("slides") / (slide_name(i) + ".ppm");
    write_ppm(out() / rel, generate_synthetic_slide(spec), hash_line(hash_) + "\nlabel " + std::to_string(label));
    entries[i] = {rel.generic_string(), label, "train"};
    outputs.push_back(out() / rel);
  }
  // Stratified split: a fixed share of every class is held out.
  for (std::size_t c = 0; c < classes; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = c; i < n; i += classes) members.push_back(i);
    Rng rng(mix_seed(mix_seed(seed, 0x5B17), c));
    for (std::size_t i = members.size(); i > 1; --i) std::swap(members[i - 1], members[rng.below(i)]);
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(members.size())));
    for (std::size_t i = 0; i < n_test; ++i) entries[members[i]].split = "test";
  }
  write_manifest(out() / "manifest.tsv", entries, hash_line(hash_));
  outputs.push_back(out() / "manifest.tsv");
  stamp("synth", outputs);
  log() << "synth: " << n << " slides, " << classes << " classes\n";
}

namespace {

struct Slide {
  ManifestEntry entry;
  std::string id;
  bool test = false;
};

std::vector<Slide> load_slides(const fs::path& root, const HashCheck& check) {
  const fs::path manifest = root / "manifest.tsv";
  require_file(manifest, "synth");
  const auto hash = find_hash(text_lines(manifest));
  if (!hash) throw PipelineError(manifest.string() + " carries no config hash");
  check(*hash, manifest);
  std::vector<Slide> slides;
  for (ManifestEntry& e : read_manifest(manifest)) {
    Slide s{e, e.slide_id(), e.split == "test"};
    slides.push_back(std::move(s));
  }
  return slides;
}

}  // namespace

void Pipeline::segment() {
  if (up_to_date("segment")) return;
  const SegmentParams params{config_.get_double("segment.luminance_threshold"),
                             config_.get_size("segment.min_region_px")};
  std::vector<fs::path> outputs;
  for (const Slide& s : load_slides(out(), hash_check())) {
    require_file(s.entry.path, "synth");
    const auto hash = find_hash(read_ppm_comments(s.entry.path));
    check_hash(hash.value_or(0), s.entry.path);
    const TissueMask mask = segment_tissue(read_ppm(s.entry.path), params);
    if (mask.count() == 0) log::warn("slide " + s.id + " has no tissue");
    const fs::path path = out() / "masks" / (s.id + ".ppm");
    write_ppm(path, mask_to_image(mask), hash_line(hash_));
    outputs.push_back(path);
  }
  stamp("segment", outputs);
  log() << "segment: " << outputs.size() << " masks\n";
}

void Pipeline::patch() {
  if (up_to_date("patch")) return;
  const std::size_t size = config_.get_size("patch.size");
  const double min_fraction = config_.get_double("patch.min_tissue_fraction");
  std::vector<fs::path> outputs;
  std::size_t total = 0;
  for (const Slide& s : load_slides(out(), hash_check())) {
    const fs::path mask_path = out() / "masks" / (s.id + ".ppm");
    require_file(mask_path, "segment");
    check_hash(find_hash(read_ppm_comments(mask_path)).value_or(0), mask_path);
    PatchSet set;
    set.config_hash = hash_;
    set.slide_id = s.id;
    set.label = s.entry.label;
    set.patch_size = size;
    set.patches = extract_patches(read_ppm(s.entry.path), mask_from_image(read_ppm(mask_path)), size, min_fraction);
    if (set.patches.empty()) log::warn("slide " + s.id + " yields no patches");
    total += set.patches.size();
    const fs::path path = out() / "patches" / (s.id + ".patches");
    save_patch_set(path, set);
    outputs.push_back(path);
  }
  stamp("patch", outputs);
  log() << "patch: " << total << " patches over " << outputs.size() << " slides\n";
}

namespace {

PatchSet load_patches_checked(const fs::path& path, const HashCheck& check) {
  require_file(path, "patch");
  PatchSet set = load_patch_set(path);
  check(set.config_hash, path);
  return set;
}

}  // namespace

void Pipeline::pretrain() {
  if (up_to_date("pretrain")) return;
  std::vector<RasterImage> images;
  for (const Slide& s : load_slides(out(), hash_check())) {
    if (s.test) continue;
    for (Patch& p : load_patches_checked(out() / "patches" / (s.id + ".patches"), hash_check()).patches)
      images.push_back(std::move(p.pixels));
  }
  const std::uint64_t seed = mix_seed(config_.get_u64("seed"), 0x55);
  const std::size_t cap = config_.get_size("ssl.max_patches");
  if (cap > 0 && images.size() > cap) {
    Rng rng(mix_seed(seed, 1));
    for (std::size_t i = 0; i < cap; ++i) std::swap(images[i], images[i + rng.below(images.size() - i)]);
    images.resize(cap);
  }
  if (images.size() < 2) throw PipelineError("pretrain needs at least two training patches, found " +
                                             std::to_string(images.size()));

  ssl::AugmentationParams aug{config_.get_double("aug.p_hflip"),    config_.get_double("aug.p_vflip"),
                              config_.get_double("aug.contrast_lo"), config_.get_double("aug.contrast_hi"),
                              config_.get_double("aug.p_blur"),     config_.get_double("aug.sigma_lo"),
                              config_.get_double("aug.sigma_hi")};
  ssl::PretrainHyper hyper;
  hyper.epochs = config_.get_size("ssl.epochs");
  hyper.batch = config_.get_size("ssl.batch");
  hyper.lr = config_.get_double("ssl.lr");
  hyper.weight_decay = config_.get_double("ssl.weight_decay");
  hyper.tau = config_.get_double("ssl.tau");
  hyper.momentum = config_.get_double("ssl.momentum");
  hyper.queue_capacity = config_.get_size("ssl.queue");

  log() << "pretrain: " << images.size() << " patches, " << hyper.epochs << " epochs\n";
  ssl::PretrainResult result = ssl::pretrain(images, encoder_config(config_), aug, hyper, seed);

  Checkpoint ck = ssl::to_checkpoint(result.query);
  ck.config_hash = hash_;
  ck.adam = result.adam;
  const fs::path ckpt = out() / "models" / "encoder.ckpt";
  save_checkpoint(ckpt, ck);
  LossCurve curve{result.epoch_loss, {}};
  const auto steps_per_epoch = result.steps / std::max<std::size_t>(hyper.epochs, 1);
  for (std::size_t e = 0; e < hyper.epochs; ++e)
    curve.epoch_lr.push_back(cosine_lr(static_cast<std::int64_t>(e * steps_per_epoch),
                                       {hyper.lr, static_cast<std::size_t>(result.steps), 0.0}));
  const fs::path log_path = out() / "models" / "encoder.log";
  io::write_file_atomic(log_path, loss_log(hash_, curve));
  stamp("pretrain", {ckpt, log_path});
  log() << "pretrain: loss " << fmt("%.4f", curve.epoch_loss.front()) << " -> " << fmt("%.4f", curve.epoch_loss.back())
        << "\n";
}

void Pipeline::featurize() {
  if (up_to_date("featurize")) return;
  const fs::path ckpt_path = out() / "models" / "encoder.ckpt";
  require_file(ckpt_path, "pretrain");
  const Checkpoint ck = load_checkpoint(ckpt_path);
  check_hash(ck.config_hash, ckpt_path);
  const ssl::Encoder encoder = ssl::from_checkpoint(ck);

  std::vector<fs::path> outputs;
  for (const Slide& s : load_slides(out(), hash_check())) {
    const PatchSet set = load_patches_checked(out() / "patches" / (s.id + ".patches"), hash_check());
    for (const std::string& tap : kTaps) {
      FeatureStore store;
      if (!set.patches.empty()) {
        const ssl::FeatureMatrices f = ssl::extract_features(encoder, set.patches);
        store = make_feature_store(set.patches, tap == "small" ? f.small : f.large, tap);
      } else {
        store.tap = tap;
        store.dim = encoder.config().tap_dim(ssl::parse_tap(tap));
      }
      store.config_hash = hash_;
      store.slide_id = s.id;
      store.label = set.label;
      const fs::path path = out() / "features" / tap / (s.id + ".feat");
      save_feature_store(path, store);
      outputs.push_back(path);
    }
  }
  stamp("featurize", outputs);
  log() << "featurize: " << outputs.size() << " feature stores\n";
}

void Pipeline::graph() {
  if (up_to_date("graph")) return;
  const std::size_t k = config_.get_size("graph.k");
  std::vector<fs::path> outputs;
  for (const Slide& s : load_slides(out(), hash_check())) {
    for (const std::string& tap : kTaps) {
      const fs::path in = out() / "features" / tap / (s.id + ".feat");
      require_file(in, "featurize");
      const FeatureStore store = load_feature_store(in);
      check_hash(store.config_hash, in);
      const fs::path path = out() / "graphs" / tap / (s.id + ".graph");
      if (store.records.empty()) {
        log::warn("slide " + s.id + " has no patches; no graph written");
        fs::remove(path);
        continue;
      }
      WSIGraph g = build_slide_graph(store.matrix(), store.centroids(), k, store.label);
      g.slide_id = s.id;
      g.tap = tap;
      g.config_hash = hash_;
      save_graph(path, g);
      outputs.push_back(path);
    }
  }
  stamp("graph", outputs);
  log() << "graph: " << outputs.size() << " graphs\n";
}

namespace {

std::vector<WSIGraph> load_graphs(const fs::path& root, const std::vector<Slide>& slides, bool test,
                                  const std::string& tap, const HashCheck& check) {
  std::vector<WSIGraph> graphs;
  for (const Slide& s : slides) {
    if (s.test != test) continue;
    const fs::path path = root / "graphs" / tap / (s.id + ".graph");
    if (!fs::exists(path)) {
      log::warn("slide " + s.id + " has no " + tap + " graph; skipped");
      continue;
    }
    graphs.push_back(load_graph(path));
    check(graphs.back().config_hash, path);
  }
  return graphs;
}

}  // namespace

void Pipeline::train_gcn() {
  if (up_to_date("train-gcn")) return;
  const auto slides = load_slides(out(), hash_check());
  std::vector<fs::path> outputs;
  for (std::size_t t = 0; t < kTaps.size(); ++t) {
    const std::string& tap = kTaps[t];
    const std::vector<WSIGraph> graphs = load_graphs(out(), slides, false, tap, hash_check());
    if (graphs.empty()) throw PipelineError("no training graphs for tap " + tap + " (run 'graph' first)");
    TrainConfig tc;
    tc.epochs = config_.get_size("gcn.epochs");
    tc.lr = config_.get_double("gcn.lr");
    tc.weight_decay = config_.get_double("gcn.weight_decay");
    tc.floor_lr = config_.get_double("gcn.lr_floor");
    tc.seed = mix_seed(config_.get_u64("seed"), 0x6C0 + t);
    const gcn::TrainResult result = gcn::train(graphs, gcn_config(config_, graphs.front().feature_dim()), tc);

    Checkpoint ck = gcn::to_checkpoint(result.model);
    ck.config_hash = hash_;
    const fs::path ckpt = out() / "models" / ("gcn_" + tap + ".ckpt");
    const fs::path log_path = out() / "models" / ("gcn_" + tap + ".log");
    save_checkpoint(ckpt, ck);
    io::write_file_atomic(log_path, loss_log(hash_, result.curve));
    outputs.insert(outputs.end(), {ckpt, log_path});
    log() << "train-gcn: " << tap << " tap, " << graphs.size() << " graphs, final loss "
          << fmt("%.4f", result.curve.epoch_loss.back()) << "\n";
  }
  stamp("train-gcn", outputs);
}

void Pipeline::train_baseline() {
  if (up_to_date("train-baseline")) return;
  const std::size_t bag_size = config_.get_size("mil.bag_size");
  const std::size_t patch_size = config_.get_size("patch.size");
  std::vector<mil::TileBag> bags;
  for (const Slide& s : load_slides(out(), hash_check())) {
    if (s.test) continue;
    const PatchSet set = load_patches_checked(out() / "patches" / (s.id + ".patches"), hash_check());
    mil::TileBag bag = mil::select_tiles(set.patches, bag_size, patch_size);
    bag.slide_id = s.id;
    bag.label = set.label;
    bags.push_back(std::move(bag));
  }
  if (bags.empty()) throw PipelineError("no training slides for the baseline");
  mil::MilConfig mc;
  mc.bag_size = bag_size;
  mc.hidden = config_.get_sizes("mil.hidden");
  mc.num_classes = config_.get_size("data.classes");
  TrainConfig tc;
  tc.epochs = config_.get_size("mil.epochs");
  tc.lr = config_.get_double("mil.lr");
  tc.weight_decay = config_.get_double("mil.weight_decay");
  tc.seed = mix_seed(config_.get_u64("seed"), 0xB45E);
  const mil::TrainResult result = mil::train_baseline(bags, mc, tc);

  Checkpoint ck = mil::to_checkpoint(result.model);
  ck.config_hash = hash_;
  const fs::path ckpt = out() / "models" / "baseline.ckpt";
  const fs::path log_path = out() / "models" / "baseline.log";
  save_checkpoint(ckpt, ck);
  io::write_file_atomic(log_path, loss_log(hash_, result.curve));
  stamp("train-baseline", {ckpt, log_path});
  log() << "train-baseline: " << bags.size() << " bags, final loss " << fmt("%.4f", result.curve.epoch_loss.back())
        << "\n";
}

Evaluation Pipeline::evaluate() {
  const std::size_t classes = config_.get_size("data.classes");
  auto load_model = [&](const std::string& name) {
    const fs::path path = out() / "models" / (name + ".ckpt");
    require_file(path, name == "baseline" ? "train-baseline" : "train-gcn");
    return std::pair{load_checkpoint(path), path};
  };
  auto check_classes = [&](const std::string& name, std::size_t model_classes) {
    if (model_classes != classes)
      throw PipelineError("model " + name + " predicts " + std::to_string(model_classes) +
                          " classes but the dataset has " + std::to_string(classes) + " classes");
  };

  std::vector<gcn::GCNModel> gcns;
  for (const std::string& tap : kTaps) {
    auto [ck, path] = load_model("gcn_" + tap);
    gcns.push_back(gcn::from_checkpoint(ck));
    check_classes("gcn_" + tap, gcns.back().config().num_classes);
    check_hash(ck.config_hash, path);
  }
  auto [base_ck, base_path] = load_model("baseline");
  const mil::MilModel baseline = mil::from_checkpoint(base_ck);
  check_classes("baseline", baseline.config().num_classes);
  check_hash(base_ck.config_hash, base_path);

  std::map<std::string, metrics::Report> reports;
  for (const std::string& m : kModels) reports[m] = {m, hash_, classes, {}};
  const std::size_t patch_size = config_.get_size("patch.size");

  for (const Slide& s : load_slides(out(), hash_check())) {
    if (!s.test) continue;
    if (s.entry.label < 0 || static_cast<std::size_t>(s.entry.label) >= classes)
      throw PipelineError("slide " + s.id + " has label " + std::to_string(s.entry.label) + " but the dataset has " +
                          std::to_string(classes) + " classes");
    std::vector<std::vector<double>> member_probs;
    for (std::size_t t = 0; t < kTaps.size(); ++t) {
      const fs::path path = out() / "graphs" / kTaps[t] / (s.id + ".graph");
      if (!fs::exists(path)) break;
      const WSIGraph g = load_graph(path);
      check_hash(g.config_hash, path);
      member_probs.push_back(gcn::forward(g, gcns[t]));
    }
    auto add_row = [&](const std::string& model, std::vector<double> probs) {
      const int predicted = static_cast<int>(gcn::argmax(probs));
      reports[model].rows.push_back({s.id, s.entry.label, predicted, std::move(probs)});
    };
    if (member_probs.size() == kTaps.size()) {
      add_row("gcn_small", member_probs[0]);
      add_row("gcn_large", member_probs[1]);
      add_row("ensemble", gcn::ensemble_mean(member_probs));
    } else {
      log::warn("slide " + s.id + " lacks graphs; excluded from graph model reports");
    }
    const PatchSet set = load_patches_checked(out() / "patches" / (s.id + ".patches"), hash_check());
    mil::TileBag bag = mil::select_tiles(set.patches, baseline.config().bag_size, patch_size);
    add_row("baseline", mil::predict_baseline(baseline, bag));
  }

  Evaluation ev;
  for (const std::string& m : kModels) {
    const metrics::Report& r = reports[m];
    if (r.rows.empty()) throw PipelineError("no held-out slides to evaluate " + m);
    io::write_file_atomic(out() / "reports" / ("metrics_" + m + ".txt"), r.format());
    ev.scores.push_back({m, r.kappa(), r.accuracy(), r.rows.size()});
    log() << "evaluate: " << m << " kappa " << fmt("%.4f", r.kappa()) << " accuracy " << fmt("%.4f", r.accuracy())
          << " over " << r.rows.size() << " slides\n";
  }
  std::string summary = "# " + hash_line(hash_) + "\nmodel\tkappa\taccuracy\tslides\n";
  for (const ModelScore& s : ev.scores)
    summary += s.model + "\t" + fmt("%.6f", s.kappa) + "\t" + fmt("%.6f", s.accuracy) + "\t" +
               std::to_string(s.slides) + "\n";
  io::write_file_atomic(out() / "reports" / "summary.tsv", summary);
  return ev;
}

void Pipeline::report() {
  const std::string comment = hash_line(hash_);
  std::vector<Series> series;
  std::string csv = "# " + comment + "\nmodel,epoch,loss,lr\n";
  for (const std::string name : {"encoder", "gcn_small", "gcn_large", "baseline"}) {
    const fs::path path = out() / "models" / (name + ".log");
    require_file(path, name == std::string("encoder") ? "pretrain" : "train-*");
    check_hash(find_hash(text_lines(path)).value_or(0), path);
    const LossCurve c = read_loss_log(path);
    for (std::size_t e = 0; e < c.epoch_loss.size(); ++e)
      csv += std::string(name) + "," + std::to_string(e + 1) + "," + fmt("%.9g", c.epoch_loss[e]) + "," +
             fmt("%.9g", c.epoch_lr[e]) + "\n";
    series.push_back({name, c.epoch_loss});
  }
  io::write_file_atomic(out() / "reports" / "loss_curves.csv", csv);
  io::write_file_atomic(out() / "reports" / "loss_curves.svg",
                        svg_line_chart("Training loss per epoch", "mean loss", series, comment));

  std::string kcsv = "# " + comment + "\nmodel,kappa,accuracy,slides\n";
  std::vector<std::string> labels;
  std::vector<double> kappas;
  for (const std::string& m : kModels) {
    const fs::path path = out() / "reports" / ("metrics_" + m + ".txt");
    require_file(path, "evaluate");
    const auto bytes = io::read_file(path);
    const metrics::Report r = metrics::parse_report(std::string(bytes.begin(), bytes.end()));
    check_hash(r.config_hash, path);
    kcsv += m + "," + fmt("%.6f", r.kappa()) + "," + fmt("%.6f", r.accuracy()) + "," + std::to_string(r.rows.size()) +
            "\n";
    labels.push_back(m);
    kappas.push_back(r.kappa());
  }
  io::write_file_atomic(out() / "reports" / "kappa.csv", kcsv);
  io::write_file_atomic(out() / "reports" / "kappa.svg",
                        svg_bar_chart("Quadratic weighted kappa (held-out)", labels, kappas, 1.0, comment));
  log() << "report: wrote " << (out() / "reports").string() << "\n";
}

Evaluation Pipeline::run_all() {
  synth();
  segment();
  patch();
  pretrain();
  featurize();
  graph();
  train_gcn();
  train_baseline();
  Evaluation ev = evaluate();
  report();
  return ev;
}

}  // namespace slidegraph::app
