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


#ifndef VULNTRIAGE_PIPELINE_HPP_
#define VULNTRIAGE_PIPELINE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vulntriage/classical.hpp"
#include "vulntriage/corpus.hpp"
#include "vulntriage/ensemble.hpp"
#include "vulntriage/eval.hpp"
#include "vulntriage/feature_matrix.hpp"
#include "vulntriage/features.hpp"
#include "vulntriage/neural.hpp"
#include "vulntriage/reduce.hpp"
#include "vulntriage/select.hpp"

namespace vulntriage::pipeline {

// Every hyperparameter of a run. The JSON tree returned by default_tree()
// is the config file format; keys mirror the fields below.
struct RunConfig {
  std::string data;
  std::string out = "out";
  std::map<std::string, std::string> schema;  // field -> column header
  std::string lexicon;                        // empty: built-in phrases
  std::uint64_t seed = corpus::kDefaultSeed;
  double split = corpus::kDefaultTestFraction;
  double severity_threshold = corpus::kHighSeverityThreshold;

  features::TfidfConfig tfidf;
  std::size_t svd_k = 100;
  std::size_t pca_k = 100;
  std::size_t select_k = 300;
  std::vector<std::size_t> chi2_sweep = {100, 300, 1000};
  std::vector<std::size_t> pca_sweep = {2, 10, 50, 100};

  classical::LogRegConfig logreg;
  classical::TreeConfig tree;
  classical::ForestConfig forest;
  std::size_t knn_k = 5;

  neural::NetSpec ffnn;  // vocab_size and tabular_dim are filled per run
  neural::NetSpec cnn = [] {
    neural::NetSpec s;
    s.variant = neural::Variant::kCnn;
    return s;
  }();
  neural::TrainConfig train;
  std::size_t vocab_cap = 3000;

  ensemble::EnsembleConfig ensemble;

  static nlohmann::json default_tree();
  // Throws ConfigError on unknown keys or ill-typed values.
  static RunConfig from_tree(const nlohmann::json& tree);
  nlohmann::json to_tree() const;
};

// Applies "a.b=value" assignments; value parses as JSON when possible and
// as a plain string otherwise.
void apply_override(nlohmann::json& tree, const std::string& assignment);

struct Prepared {
  std::size_t raw_rows = 0;
  corpus::LabeledDataset data;  // cleaned, labeled, split
  std::vector<corpus::DisclosureRecord> train;
  std::vector<corpus::DisclosureRecord> test;
  std::vector<int> y_train;
  std::vector<int> y_test;
};

Prepared prepare(std::vector<corpus::DisclosureRecord> raw, const RunConfig& cfg);
Prepared prepare(const RunConfig& cfg);  // reads cfg.data

// Train-fitted encoders for the vendor, indicator and text blocks.
struct Featurizer {
  features::KeywordLexicon lexicon = features::KeywordLexicon::default_lexicon();
  features::TfidfModel tfidf;
  features::VendorEncoder vendor;

  static Featurizer fit(std::span<const corpus::DisclosureRecord> train,
                        const RunConfig& cfg);
  FeatureMatrix structured(std::span<const corpus::DisclosureRecord> r) const;
  FeatureMatrix text(std::span<const corpus::DisclosureRecord> r) const;
  FeatureMatrix baseline(std::span<const corpus::DisclosureRecord> r) const;

  nlohmann::json to_json() const;
  static Featurizer from_json(const nlohmann::json& j);
};

struct Scored {
  std::string name;
  std::vector<double> probs;
  eval::EvalReport report;
};

struct FeatureBenchmark {
  eval::BenchmarkTable table;  // the six pipelines
  eval::BenchmarkTable sweep;  // chi-square k and PCA k sweeps
  std::vector<Scored> scored;
  std::vector<std::string> settings;  // one line per pipeline in table order
  Featurizer featurizer;
  std::shared_ptr<classical::LogRegModel> baseline_model;
  std::optional<reduce::SvdModel> svd;
  std::vector<double> explained_variance;
  std::vector<std::vector<std::string>> svd_terms;
  std::optional<select::FeatureScores> chi2;
  std::optional<select::FeatureScores> mutual_info;
  std::vector<std::pair<std::string, std::size_t>> keywords;
  std::vector<std::pair<classical::Coefficient, int>> coefficients;  // sign
  Eigen::MatrixXd pca_scatter;  // test rows x 2
};

FeatureBenchmark benchmark_features(const Prepared& p, const RunConfig& cfg);

struct ModelBenchmark {
  eval::BenchmarkTable table;
  std::vector<Scored> scored;
  std::map<std::string, nlohmann::json> models;
  std::optional<neural::TrainedNet> ffnn;
  std::optional<neural::TrainedNet> cnn;
  std::optional<neural::PaddedSequences> ffnn_test;
  std::optional<neural::PaddedSequences> cnn_test;
  Eigen::MatrixXd test_tabular;
};

inline constexpr const char* kLstmStatus = "out of scope";

ModelBenchmark benchmark_models(const Prepared& p, const RunConfig& cfg);

struct EnsembleOutcome {
  ensemble::Strategy strategy = ensemble::Strategy::kFeatureSplit;
  std::optional<ensemble::EnsembleResult> result;  // empty on failure
  std::optional<eval::EvalReport> report;
  std::string error;
};

// One outcome per strategy, in declaration order.
std::vector<EnsembleOutcome> run_ensembles(const Prepared& p, const RunConfig& cfg);

// Majority-class rate of the test labels.
double majority_rate(std::span<const int> y);

}  // namespace vulntriage::pipeline

#endif  // VULNTRIAGE_PIPELINE_HPP_
