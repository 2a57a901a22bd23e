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


#ifndef VULNTRIAGE_ENSEMBLE_HPP_
#define VULNTRIAGE_ENSEMBLE_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vulntriage/classical.hpp"
#include "vulntriage/feature_matrix.hpp"

namespace vulntriage::ensemble {

enum class Strategy { kFeatureSplit, kBootstrap, kHeterogeneous, kInstance, kStacking };

std::string_view strategy_name(Strategy s);
Strategy strategy_from_name(std::string_view name);  // throws ConfigError
std::vector<Strategy> all_strategies();

struct EnsembleConfig {
  std::uint64_t seed = 42;
  double threshold = 0.5;
  classical::LogRegConfig logreg;
  classical::ForestConfig forest;  // seed is replaced by a derived stream
  std::size_t knn_k = 5;

  std::size_t bootstrap_members = 5;
  double sample_fraction = 0.8;
  bool with_replacement = true;  // false draws a subsample instead

  std::vector<double> instance_C = {0.5, 1.0, 2.0};

  std::size_t folds = 5;
  bool out_of_fold = true;  // false fits bases and meta-model on the same rows

  nlohmann::json to_json() const;
  // Missing keys keep their defaults.
  static EnsembleConfig from_json(const nlohmann::json& j);
};

struct EnsembleResult {
  Strategy strategy = Strategy::kFeatureSplit;
  std::vector<std::string> member_names;
  std::vector<std::vector<double>> member_probs;  // one vector per member
  std::vector<double> probs;
  std::vector<int> labels;
};

// Row-wise arithmetic mean. Throws ShapeError on ragged input.
std::vector<double> mean_probabilities(std::span<const std::vector<double>> members);

std::vector<int> threshold_labels(std::span<const double> probs, double threshold);

// Sorted row indices for each bootstrap member, each holding both classes.
// Throws FitError after 10 single-class draws for one member.
std::vector<std::vector<std::size_t>> bootstrap_draws(std::span<const int> y,
                                                      std::size_t members,
                                                      double fraction,
                                                      bool with_replacement,
                                                      std::uint64_t seed);

// Fold id per row; every class is spread round-robin over the folds after a
// seeded shuffle. Throws FitError when a class has fewer than two rows.
std::vector<std::size_t> stratified_folds(std::span<const int> y, std::size_t folds,
                                          std::uint64_t seed);

EnsembleResult feature_split(const FeatureMatrix& train, std::span<const int> y,
                             const FeatureMatrix& test, const EnsembleConfig& cfg = {});
EnsembleResult bootstrap(const FeatureMatrix& train, std::span<const int> y,
                         const FeatureMatrix& test, const EnsembleConfig& cfg = {});
EnsembleResult heterogeneous(const FeatureMatrix& train, std::span<const int> y,
                             const FeatureMatrix& test, const EnsembleConfig& cfg = {});
EnsembleResult instance(const FeatureMatrix& train, std::span<const int> y,
                        const FeatureMatrix& test, const EnsembleConfig& cfg = {});
EnsembleResult stacking(const FeatureMatrix& train, std::span<const int> y,
                        const FeatureMatrix& test, const EnsembleConfig& cfg = {});

EnsembleResult run(Strategy s, const FeatureMatrix& train, std::span<const int> y,
                   const FeatureMatrix& test, const EnsembleConfig& cfg = {});

// Columns: row, each member's probability, ensemble probability, label.
std::string result_csv(const EnsembleResult& r);

}  // namespace vulntriage::ensemble

#endif  // VULNTRIAGE_ENSEMBLE_HPP_
