/*
 * Copyright 2026 The vulntriage Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "synthetic.hpp"
#include "vulntriage/cli.hpp"
#include "vulntriage/csv.hpp"
#include "vulntriage/error.hpp"

namespace vulntriage::cli {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

struct Invocation {
  int status;
  std::string out, err;
};

Invocation invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "vulntriage");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int status = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("vulntriage_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    data_ = (dir_ / "zdi.csv").string();
    testing::SyntheticOptions opts;
    opts.rows = 160;
    spit(data_, testing::synthetic_csv(opts));
    unsetenv(kOutEnv);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Small nets and forests keep the end-to-end runs quick.
  std::vector<std::string> fast(std::vector<std::string> args, const fs::path& out) const {
    for (std::string s : std::vector<std::string>{"--data", data_, "--out", out.string(), "--set", "train.epochs=2", "--set",
                          "forest.n_trees=10", "--set", "select.chi2_sweep=[50]", "--set",
                          "reduce.pca_sweep=[2,10]"}) {
      args.push_back(s);
    }
    return args;
  }

  fs::path dir_;
  std::string data_;
};

TEST_F(CliTest, PrecedenceDefaultsConfigSetFlagsEnvOut) {
  const auto config = dir_ / "run.json";
  spit(config, R"({"seed": 5, "split": 0.3, "knn": {"k": 9}, "out": "from_config"})");
  Options o;
  o.config = config.string();
  EXPECT_EQ(resolve(o).seed, 5u);
  EXPECT_EQ(resolve(o).knn_k, 9u);
  EXPECT_EQ(resolve(o).svd_k, 100u);
  o.overrides = {"seed=6", "knn.k=3"};
  EXPECT_EQ(resolve(o).seed, 6u);
  EXPECT_EQ(resolve(o).knn_k, 3u);
  o.seed = 7;
  EXPECT_EQ(resolve(o).seed, 7u);
  EXPECT_EQ(resolve(o).out, "from_config");
  setenv(kOutEnv, "from_env", 1);
  EXPECT_EQ(resolve(o).out, "from_env");
  o.out = "from_flag";
  EXPECT_EQ(resolve(o).out, "from_flag");
  unsetenv(kOutEnv);
}

TEST(RunConfig, StructDefaultsMatchConfigTreeDefaults) {
  const pipeline::RunConfig plain;
  EXPECT_EQ(plain.cnn.variant, neural::Variant::kCnn);
  EXPECT_EQ(plain.ffnn.variant, neural::Variant::kFfnn);
  EXPECT_EQ(pipeline::RunConfig::from_tree(pipeline::RunConfig::default_tree()).to_tree(), plain.to_tree());
}

TEST(RunConfig, ShippedDefaultConfigMatchesBuiltIns) {
  const auto shipped = nlohmann::json::parse(slurp(fs::path(VULNTRIAGE_SOURCE_DIR) / "config" / "default.json"));
  EXPECT_EQ(shipped, pipeline::RunConfig::default_tree());
}

TEST(RunConfig, NullableDepthRoundTrips) {
  auto tree = pipeline::RunConfig::default_tree();
  pipeline::apply_override(tree, "tree.max_depth=4");
  auto c = pipeline::RunConfig::from_tree(tree);
  EXPECT_EQ(c.tree.max_depth, std::optional<std::size_t>(4));
  tree = c.to_tree();
  pipeline::apply_override(tree, "tree.max_depth=null");
  EXPECT_FALSE(pipeline::RunConfig::from_tree(tree).tree.max_depth);
}

TEST_F(CliTest, UnknownConfigKeyIsRejected) {
  const auto config = dir_ / "bad.json";
  spit(config, R"({"knn": {"neighbours": 3}})");
  const auto r = invoke({"ingest", "--config", config.string(), "--data", data_});
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.err.find("neighbours"), std::string::npos) << r.err;
  Options o;
  o.overrides = {"tfidf.max_feature=10"};
  EXPECT_THROW(resolve(o), ConfigError);
}

TEST_F(CliTest, IngestReportsCountsAndWritesCleanedData) {
  const auto out = dir_ / "out";
  const auto r = invoke({"ingest", "--data", data_, "--out", out.string()});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("raw rows: 160"), std::string::npos);
  EXPECT_NE(r.out.find("split: 128 train / 32 test"), std::string::npos) << r.out;
  EXPECT_TRUE(fs::exists(out / "cleaned.csv"));
  EXPECT_EQ(slurp(out / "ingest_summary.txt"), r.out);
}

TEST_F(CliTest, IngestHeaderOnlyFileSucceedsWithZeroRows) {
  const auto empty = dir_ / "empty.csv";
  spit(empty, "zdi_id,cve_id,cvss,published,vendor,description\n");
  const auto out = dir_ / "out";
  const auto r = invoke({"ingest", "--data", empty.string(), "--out", out.string()});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("cleaned rows: 0"), std::string::npos);
  std::istringstream cleaned(slurp(out / "cleaned.csv"));
  EXPECT_TRUE(csv::read_table(cleaned).rows.empty());
}

TEST_F(CliTest, MissingDataFileFailsNamingThePath) {
  const auto missing = (dir_ / "nope.csv").string();
  const auto r = invoke({"ingest", "--data", missing, "--out", (dir_ / "out").string()});
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.err.find(missing), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "out" / "cleaned.csv"));
}

TEST_F(CliTest, BenchmarkFeaturesEmitsSixRows) {
  const auto out = dir_ / "out";
  const auto r = invoke(fast({"benchmark-features"}, out));
  ASSERT_EQ(r.status, 0) << r.err;
  std::istringstream table(slurp(out / "features_table.csv"));
  const auto t = csv::read_table(table);
  ASSERT_EQ(t.rows.size(), 6u);
  for (const auto& row : t.rows) EXPECT_EQ(row[t.header.size() - 2], "ok") << row[0];
  EXPECT_TRUE(fs::exists(out / "models" / "bundle.json"));
  EXPECT_TRUE(fs::exists(out / "explained_variance.csv"));
}

TEST_F(CliTest, BenchmarkModelsIsByteIdenticalAcrossRuns) {
  const auto a = dir_ / "a", b = dir_ / "b";
  const auto ra = invoke(fast({"benchmark-models"}, a));
  ASSERT_EQ(ra.status, 0) << ra.err;
  ASSERT_EQ(invoke(fast({"benchmark-models"}, b)).status, 0);
  for (const char* f : {"models_table.csv", "models_table.txt", "models_table.md", "models/ffnn.json", "models/cnn.json",
                        "models/random_forest.json"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  EXPECT_NE(ra.out.find("Support: 32 samples"), std::string::npos);
  const auto table = slurp(a / "models_table.csv");
  EXPECT_NE(table.find("lstm"), std::string::npos);
  EXPECT_NE(table.find("out of scope"), std::string::npos);
}

TEST_F(CliTest, EnsemblesWriteFiveSections) {
  const auto out = dir_ / "out";
  const auto r = invoke(fast({"ensembles"}, out));
  ASSERT_EQ(r.status, 0) << r.err;
  const auto text = slurp(out / "ensembles.txt");
  std::size_t sections = 0;
  for (auto pos = text.find("== "); pos != std::string::npos; pos = text.find("== ", pos + 3)) {
    if (pos == 0 || text[pos - 1] == '\n') ++sections;
  }
  EXPECT_EQ(sections, 5u) << text;
  EXPECT_NE(text.find("C = 0.5, 1.0, 2.0"), std::string::npos);
  EXPECT_NE(text.find("5 logistic regressions, 80% sampling"), std::string::npos);
}

TEST_F(CliTest, PredictScoresUnseenVendorsAndEmptyInput) {
  const auto out = dir_ / "out";
  ASSERT_EQ(invoke(fast({"benchmark-features"}, out)).status, 0);
  const auto input = dir_ / "score.csv";
  spit(input,
       "zdi_id,vendor,description\n"
       "Q1,Never Seen Corp,remote code execution heap buffer overflow\n"
       "Q2,,qwertyuiop zxcvbnm\n");
  const auto scored = dir_ / "scored.csv";
  auto r = invoke({"predict", "--out", out.string(), "--input", input.string(), "--output",
                   scored.string()});
  ASSERT_EQ(r.status, 0) << r.err;
  std::istringstream in(slurp(scored));
  const auto t = csv::read_table(in);
  ASSERT_EQ(t.header.back(), "label");
  ASSERT_EQ(t.rows.size(), 2u);
  for (const auto& row : t.rows) {
    const double p = std::stod(row[3]);
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
    EXPECT_EQ(row[4], p >= 0.5 ? "1" : "0");
  }

  const auto empty = dir_ / "empty.csv";
  spit(empty, "zdi_id,vendor,description\n");
  r = invoke({"predict", "--out", out.string(), "--input", empty.string()});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(slurp(out / "predictions.csv"), "zdi_id,vendor,description,probability,label\n");

  const auto bad = dir_ / "bad.csv";
  spit(bad, "zdi_id,vendor\nQ1,Acme\n");
  EXPECT_NE(invoke({"predict", "--out", out.string(), "--input", bad.string()}).status, 0);
}

TEST_F(CliTest, PlotNeedsItsArtifacts) {
  const auto out = dir_ / "out";
  auto r = invoke({"plot", "variance", "--out", out.string()});
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.err.find("explained_variance.csv"), std::string::npos) << r.err;

  ASSERT_EQ(invoke(fast({"benchmark-features"}, out)).status, 0);
  r = invoke({"plot", "keywords", "--out", out.string()});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto svg = slurp(out / "plots" / "keywords.svg");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  std::size_t bars = 0;
  for (auto pos = svg.find("<rect class=\"bar\""); pos != std::string::npos;
       pos = svg.find("<rect class=\"bar\"", pos + 1)) {
    ++bars;
  }
  EXPECT_GT(bars, 0u);
  EXPECT_LE(bars, 10u);
  ASSERT_EQ(invoke({"plot", "variance", "--out", out.string()}).status, 0);
  EXPECT_TRUE(fs::exists(out / "plots" / "variance.csv"));
  EXPECT_NE(invoke({"plot", "sunburst", "--out", out.string()}).status, 0);
}

TEST_F(CliTest, NoSubcommandIsAnError) { EXPECT_NE(invoke({}).status, 0); }

}  // namespace
}  // namespace vulntriage::cli
