// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>

#include "cli.hpp"
#include "run_config.hpp"
#include "slidegraph/binary_io.hpp"
#include "support.hpp"

namespace slidegraph::app {
namespace {

namespace fs = std::filesystem;

// Small enough to run every stage in a few seconds.
constexpr const char* kTinyConfig = R"(# tiny end-to-end run
seed = 3
data.slides = 18
data.classes = 3
data.width = 128
data.height = 128
ssl.hidden = 48, 32
ssl.tap_small_dim = 16
ssl.tap_large_dim = 32
ssl.projection_dim = 16
ssl.epochs = 2
ssl.batch = 16
ssl.max_patches = 96
graph.k = 4
gcn.layers = 16, 16
gcn.head = 8
gcn.epochs = 3
gcn.lr = 1e-3
mil.epochs = 3
)";

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

TEST(RunConfigFile, ParsesOverridesAndRejectsUnknownKeys) {
  RunConfig c = RunConfig::from_text("seed = 11\n# comment\ngraph.k=5\n", "inline");
  EXPECT_EQ(c.get_u64("seed"), 11u);
  EXPECT_EQ(c.get_size("graph.k"), 5u);
  EXPECT_EQ(c.get_sizes("gcn.layers"), (std::vector<std::size_t>{128, 128}));
  EXPECT_THROW(RunConfig::from_text("no_such.key = 1\n", "inline"), ConfigError);
  EXPECT_THROW(c.set("graph.k", "many"), ConfigError);
  try {
    RunConfig::from_text("seed = 1\nbogus = 2\n", "cfg");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_TRUE(contains(e.what(), "cfg:2")) << e.what();
  }
}

TEST(RunConfigFile, HashTracksResolvedValuesOnly) {
  RunConfig a, b;
  b.set("graph.k", "8");
  EXPECT_EQ(a.hash(), b.hash());
  b.set("graph.k", "9");
  EXPECT_NE(a.hash(), b.hash());
  EXPECT_EQ(hex_hash(0xabcULL), "0000000000000abc");
}

TEST(Cli, UsageAndConfigErrorsExitTwo) {
  testing::TempDir dir;
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"nonsense"}).code, 2);
  write_text(dir / "bad.cfg", "gcn.depth = 3\n");
  const Result r = run({"--config", (dir / "bad.cfg").string(), "config"});
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(contains(r.err, "gcn.depth")) << r.err;
  EXPECT_EQ(run({"--set", "graph.k", "config"}).code, 2);
}

TEST(Cli, ConfigComesFromEnvironmentAndFlagsOverride) {
  testing::TempDir dir;
  write_text(dir / "env.cfg", "graph.k = 6\nseed = 2\n");
  ::setenv(kConfigEnv, (dir / "env.cfg").c_str(), 1);
  const Result r = run({"config", "--seed", "5"});
  ::unsetenv(kConfigEnv);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(contains(r.out, "graph.k = 6")) << r.out;
  EXPECT_TRUE(contains(r.out, "seed = 5")) << r.out;
  EXPECT_TRUE(contains(r.out, "# config_hash ")) << r.out;
}

TEST(Cli, MissingInputsFailWithStageHint) {
  testing::TempDir dir;
  const Result r = run({"--out", dir.path().string(), "graph"});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(contains(r.err, "missing input")) << r.err;
}

// One tiny pipeline run shared by the end-to-end tests below.
class TinyPipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = std::make_unique<testing::TempDir>();
    write_text(config(), kTinyConfig);
    const Result r = run({"--config", config().string(), "--out", out().string(), "pipeline"});
    ASSERT_EQ(r.code, 0) << r.err;
    log_ = r.err;
  }
  static void TearDownTestSuite() { dir_.reset(); }

  static fs::path config() { return *dir_ / "tiny.cfg"; }
  static fs::path out() { return *dir_ / "run"; }

  static std::unique_ptr<testing::TempDir> dir_;
  static std::string log_;
};

std::unique_ptr<testing::TempDir> TinyPipeline::dir_;
std::string TinyPipeline::log_;

TEST_F(TinyPipeline, WritesEveryArtifactAndLogsResolvedConfig) {
  EXPECT_TRUE(contains(log_, "resolved config")) << log_;
  EXPECT_TRUE(contains(log_, "ssl.max_patches = 96")) << log_;
  for (const char* rel : {"manifest.tsv", "models/encoder.ckpt", "models/gcn_small.ckpt", "models/gcn_large.ckpt",
                          "models/baseline.ckpt", "reports/metrics_gcn_small.txt", "reports/metrics_ensemble.txt",
                          "reports/metrics_baseline.txt", "reports/summary.tsv", "reports/loss_curves.csv",
                          "reports/loss_curves.svg", "reports/kappa.csv", "reports/kappa.svg"})
    EXPECT_TRUE(fs::exists(out() / rel)) << rel;
  const std::string metrics = slurp(out() / "reports/metrics_ensemble.txt");
  EXPECT_TRUE(contains(metrics, "kappa ")) << metrics;
  EXPECT_TRUE(contains(metrics, "# config_hash ")) << metrics;
}

TEST_F(TinyPipeline, RerunInFreshDirectoryIsByteIdentical) {
  testing::TempDir again;
  const Result r = run({"--config", config().string(), "--out", again.path().string(), "pipeline"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* rel : {"reports/metrics_gcn_small.txt", "reports/metrics_gcn_large.txt",
                          "reports/metrics_ensemble.txt", "reports/metrics_baseline.txt", "reports/summary.tsv",
                          "reports/loss_curves.csv", "reports/kappa.svg"})
    EXPECT_EQ(slurp(again / rel), slurp(out() / rel)) << rel;
}

TEST_F(TinyPipeline, ResumeSkipsCurrentStagesAndEvaluateIsIdempotent) {
  const std::string before = slurp(out() / "reports/metrics_ensemble.txt");
  const Result r = run({"--config", config().string(), "--out", out().string(), "--resume", "pipeline"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(contains(r.err, "pretrain: up to date, skipping")) << r.err;
  EXPECT_TRUE(contains(r.err, "train-gcn: up to date, skipping")) << r.err;
  const Result e = run({"--config", config().string(), "--out", out().string(), "evaluate"});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_EQ(slurp(out() / "reports/metrics_ensemble.txt"), before);
}

TEST_F(TinyPipeline, ClassCountMismatchNamesBothCounts) {
  const Result r =
      run({"--config", config().string(), "--out", out().string(), "--set", "data.classes=4", "evaluate"});
  EXPECT_NE(r.code, 0);
  EXPECT_TRUE(contains(r.err, "predicts 3 classes")) << r.err;
  EXPECT_TRUE(contains(r.err, "4 classes")) << r.err;
}

TEST_F(TinyPipeline, MixedConfigHashIsRefusedUnlessForced) {
  const Result r = run({"--config", config().string(), "--out", out().string(), "--set", "gcn.lr=0.002", "evaluate"});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(contains(r.err, "config hash")) << r.err;
  EXPECT_TRUE(contains(r.err, "--force")) << r.err;

  // Forced evaluation goes to a copy so the shared run keeps its reports.
  testing::TempDir copy;
  fs::copy(out(), copy.path(), fs::copy_options::recursive);
  const Result f = run({"--config", config().string(), "--out", copy.path().string(), "--set", "gcn.lr=0.002",
                        "--force", "evaluate"});
  EXPECT_EQ(f.code, 0) << f.err;
  EXPECT_TRUE(contains(f.err, "warning")) << f.err;
}

TEST_F(TinyPipeline, UnsupportedFormatVersionIsRefused) {
  testing::TempDir copy;
  fs::copy(out(), copy.path(), fs::copy_options::recursive);
  for (const auto& e : fs::directory_iterator(copy / "graphs/small")) {
    auto bytes = io::read_file(e.path());
    bytes[8] = 9;
    io::write_file_atomic(e.path(), std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  }
  const Result r = run({"--config", config().string(), "--out", copy.path().string(), "train-gcn"});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(contains(r.err, "version 9")) << r.err;
}

}  // namespace
}  // namespace slidegraph::app
