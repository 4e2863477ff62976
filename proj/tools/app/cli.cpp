// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <functional>
#include <optional>
#include <ostream>

#include "pipeline.hpp"
#include "slidegraph/error.hpp"
#include "slidegraph/log.hpp"

namespace slidegraph::app {

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"slidegraph: synthetic whole-slide grading pipeline"};
  app.require_subcommand(1, 0);
  app.fallthrough();

  std::string config_path;
  std::string out_dir = "slidegraph_out";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  bool resume = false, force = false;
  app.add_option("--config", config_path, std::string("key = value config file (default: $") + kConfigEnv + ")");
  app.add_option("--seed", seed, "override the 'seed' config key");
  app.add_option("--out", out_dir, "artifact directory")->capture_default_str();
  app.add_option("--set", overrides, "override one config key, KEY=VALUE (repeatable)");
  app.add_flag("--resume", resume, "skip stages whose recorded outputs are current");
  app.add_flag("--force", force, "accept inputs produced under a different config");

  using Stage = std::function<void(Pipeline&)>;
  const std::vector<std::pair<std::string, std::pair<std::string, Stage>>> stages{
      {"synth", {"generate the synthetic slide corpus and manifest", [](Pipeline& p) { p.synth(); }}},
      {"segment", {"threshold tissue masks", [](Pipeline& p) { p.segment(); }}},
      {"patch", {"tile slides into patch sets", [](Pipeline& p) { p.patch(); }}},
      {"pretrain", {"contrastive pretraining of the patch encoder", [](Pipeline& p) { p.pretrain(); }}},
      {"featurize", {"extract small- and large-tap patch features", [](Pipeline& p) { p.featurize(); }}},
      {"graph", {"build k-NN slide graphs", [](Pipeline& p) { p.graph(); }}},
      {"train-gcn", {"train one GCN per feature tap", [](Pipeline& p) { p.train_gcn(); }}},
      {"train-baseline", {"train the blue-ratio tile-bag baseline", [](Pipeline& p) { p.train_baseline(); }}},
      {"evaluate", {"score held-out slides and write metrics reports", [](Pipeline& p) { p.evaluate(); }}},
      {"report", {"render loss curves and kappa tables (CSV, SVG)", [](Pipeline& p) { p.report(); }}},
      {"pipeline", {"run every stage in order", [](Pipeline& p) { p.run_all(); }}},
  };
  // Several stage commands may be given at once; they run in pipeline order.
  std::vector<std::pair<CLI::App*, Stage>> by_command;
  for (const auto& [name, entry] : stages) by_command.emplace_back(app.add_subcommand(name, entry.first), entry.second);
  CLI::App* show_config = app.add_subcommand("config", "print the resolved configuration and its hash");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  RunConfig config;
  try {
    if (config_path.empty())
      if (const char* env = std::getenv(kConfigEnv); env && *env) config_path = env;
    if (!config_path.empty()) config = RunConfig::from_file(config_path);
    for (const std::string& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
      config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed) config.set("seed", std::to_string(*seed));
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  if (show_config->parsed()) {
    out << "# config_hash " << hex_hash(config.hash()) << "\n" << config.resolved();
    return 0;
  }

  const log::Sink previous = log::set_warning_sink([&err](std::string_view m) { err << "warning: " << m << "\n"; });
  int code = 0;
  try {
    Pipeline pipeline(config, Options{out_dir, resume, force, &err});
    for (auto& [command, stage] : by_command)
      if (command->parsed()) stage(pipeline);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    code = 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    code = 1;
  }
  log::set_warning_sink(previous);
  return code;
}

}  // namespace slidegraph::app
