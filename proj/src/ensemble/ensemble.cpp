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

#include "vulntriage/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "vulntriage/error.hpp"
#include "vulntriage/random.hpp"

namespace vulntriage::ensemble {

using classical::ForestModel;
using classical::KnnModel;
using classical::LogRegModel;

namespace {

constexpr int kMaxRedraws = 10;

void check_training(const FeatureMatrix& train, std::span<const int> y,
                    const FeatureMatrix& test) {
  if (train.rows() != y.size()) throw ShapeError("labels are not aligned with rows");
  if (train.cols() != test.cols()) {
    throw ShapeError(fmt::format("train has {} columns, test {}", train.cols(),
                                 test.cols()));
  }
}

std::vector<int> subset(std::span<const int> y, std::span<const std::size_t> rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (auto i : rows) out.push_back(y[i]);
  return out;
}

bool has_both_classes(std::span<const int> y) {
  bool zero = false, one = false;
  for (int v : y) (v == 1 ? one : zero) = true;
  return zero && one;
}

classical::ForestConfig forest_config(const EnsembleConfig& cfg) {
  auto f = cfg.forest;
  f.seed = derive_seed(cfg.seed, "forest");
  return f;
}

EnsembleResult averaged(Strategy s, std::vector<std::string> names,
                        std::vector<std::vector<double>> members, double threshold) {
  EnsembleResult r;
  r.strategy = s;
  r.member_names = std::move(names);
  r.member_probs = std::move(members);
  r.probs = mean_probabilities(r.member_probs);
  r.labels = threshold_labels(r.probs, threshold);
  return r;
}

// Base learners shared by the heterogeneous and stacking strategies.
std::vector<std::vector<double>> base_probabilities(const FeatureMatrix& train,
                                                    std::span<const int> y,
                                                    const FeatureMatrix& test,
                                                    const EnsembleConfig& cfg) {
  std::vector<std::vector<double>> out;
  out.push_back(LogRegModel::train(train, y, cfg.logreg).predict_proba(test));
  out.push_back(ForestModel::train(train, y, forest_config(cfg)).predict_proba(test));
  out.push_back(KnnModel::train(train, std::vector<int>(y.begin(), y.end()), cfg.knn_k)
                    .predict_proba(test));
  return out;
}

const std::vector<std::string> kBaseNames = {"logreg", "forest", "knn"};

}  // namespace

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kFeatureSplit: return "feature_split";
    case Strategy::kBootstrap: return "bootstrap";
    case Strategy::kHeterogeneous: return "heterogeneous";
    case Strategy::kInstance: return "instance";
    case Strategy::kStacking: return "stacking";
  }
  return "unknown";
}

Strategy strategy_from_name(std::string_view name) {
  for (auto s : all_strategies()) {
    if (strategy_name(s) == name) return s;
  }
  throw ConfigError(fmt::format("unknown ensemble strategy '{}'", name));
}

std::vector<Strategy> all_strategies() {
  return {Strategy::kFeatureSplit, Strategy::kBootstrap, Strategy::kHeterogeneous,
          Strategy::kInstance, Strategy::kStacking};
}

nlohmann::json EnsembleConfig::to_json() const {
  return {{"seed", seed},
          {"threshold", threshold},
          {"logreg", {{"C", logreg.C}, {"max_iter", logreg.max_iter}, {"tol", logreg.tol}}},
          {"forest", {{"n_trees", forest.n_trees}, {"bootstrap", forest.bootstrap}}},
          {"knn_k", knn_k},
          {"bootstrap_members", bootstrap_members},
          {"sample_fraction", sample_fraction},
          {"with_replacement", with_replacement},
          {"instance_C", instance_C},
          {"folds", folds},
          {"out_of_fold", out_of_fold}};
}

EnsembleConfig EnsembleConfig::from_json(const nlohmann::json& j) {
  EnsembleConfig c;
  c.seed = j.value("seed", c.seed);
  c.threshold = j.value("threshold", c.threshold);
  if (j.contains("logreg")) {
    const auto& l = j.at("logreg");
    c.logreg.C = l.value("C", c.logreg.C);
    c.logreg.max_iter = l.value("max_iter", c.logreg.max_iter);
    c.logreg.tol = l.value("tol", c.logreg.tol);
  }
  if (j.contains("forest")) {
    const auto& f = j.at("forest");
    c.forest.n_trees = f.value("n_trees", c.forest.n_trees);
    c.forest.bootstrap = f.value("bootstrap", c.forest.bootstrap);
  }
  c.knn_k = j.value("knn_k", c.knn_k);
  c.bootstrap_members = j.value("bootstrap_members", c.bootstrap_members);
  c.sample_fraction = j.value("sample_fraction", c.sample_fraction);
  c.with_replacement = j.value("with_replacement", c.with_replacement);
  c.instance_C = j.value("instance_C", c.instance_C);
  c.folds = j.value("folds", c.folds);
  c.out_of_fold = j.value("out_of_fold", c.out_of_fold);
  return c;
}

std::vector<double> mean_probabilities(std::span<const std::vector<double>> members) {
  if (members.empty()) throw ShapeError("no ensemble members");
  const std::size_t n = members.front().size();
  std::vector<double> out(n, 0.0);
  for (const auto& m : members) {
    if (m.size() != n) throw ShapeError("member probability vectors differ in length");
    for (std::size_t i = 0; i < n; ++i) out[i] += m[i];
  }
  const double k = static_cast<double>(members.size());
  for (std::size_t i = 0; i < n; ++i) {
    out[i] /= k;
    // Rounding must not push the mean outside the members' range.
    double lo = members.front()[i], hi = lo;
    for (const auto& m : members) {
      lo = std::min(lo, m[i]);
      hi = std::max(hi, m[i]);
    }
    out[i] = std::clamp(out[i], lo, hi);
  }
  return out;
}

std::vector<int> threshold_labels(std::span<const double> probs, double threshold) {
  std::vector<int> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) out[i] = probs[i] >= threshold ? 1 : 0;
  return out;
}

std::vector<std::vector<std::size_t>> bootstrap_draws(std::span<const int> y,
                                                      std::size_t members,
                                                      double fraction,
                                                      bool with_replacement,
                                                      std::uint64_t seed) {
  const std::size_t n = y.size();
  if (members == 0) throw ConfigError("bootstrap needs at least one member");
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError("sample fraction must lie in (0, 1]");
  }
  if (n == 0) throw FitError("no training rows");
  const auto size = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9)));

  std::vector<std::vector<std::size_t>> draws;
  for (std::size_t m = 0; m < members; ++m) {
    Rng rng(derive_seed(seed, "bootstrap", m));
    std::vector<std::size_t> rows;
    int attempt = 0;
    for (;; ++attempt) {
      if (attempt == kMaxRedraws) {
        throw FitError(fmt::format(
            "bootstrap member {} drew a single class {} times", m, kMaxRedraws));
      }
      if (with_replacement) {
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        rows.resize(size);
        for (auto& r : rows) r = pick(rng);
      } else {
        rows.resize(n);
        std::iota(rows.begin(), rows.end(), 0);
        std::shuffle(rows.begin(), rows.end(), rng);
        rows.resize(size);
      }
      if (has_both_classes(subset(y, rows))) break;
    }
    std::sort(rows.begin(), rows.end());
    draws.push_back(std::move(rows));
  }
  return draws;
}

std::vector<std::size_t> stratified_folds(std::span<const int> y, std::size_t folds,
                                          std::uint64_t seed) {
  if (folds < 2) throw ConfigError("stacking needs at least two folds");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 0 && y[i] != 1) throw DomainError("labels must be binary");
    by_class[y[i]].push_back(i);
  }
  for (const auto& c : by_class) {
    if (c.size() < 2) {
      throw FitError("every class needs two rows for out-of-fold training");
    }
  }
  Rng rng(derive_seed(seed, "folds"));
  std::vector<std::size_t> fold(y.size());
  std::size_t next = 0;
  for (auto& c : by_class) {
    std::shuffle(c.begin(), c.end(), rng);
    for (auto i : c) fold[i] = next++ % folds;
  }
  return fold;
}

EnsembleResult feature_split(const FeatureMatrix& train, std::span<const int> y,
                             const FeatureMatrix& test, const EnsembleConfig& cfg) {
  check_training(train, y, test);
  for (auto g : {ColumnGroup::kVendor, ColumnGroup::kIndicator}) {
    if (!train.has_group(g)) {
      throw ConfigError(fmt::format("feature split needs the '{}' block",
                                    group_name(g)));
    }
  }
  const auto train_b = train.select_groups({ColumnGroup::kVendor, ColumnGroup::kIndicator});
  const auto test_b = test.select_groups({ColumnGroup::kVendor, ColumnGroup::kIndicator});
  std::vector<std::vector<double>> members;
  members.push_back(LogRegModel::train(train, y, cfg.logreg).predict_proba(test));
  members.push_back(LogRegModel::train(train_b, y, cfg.logreg).predict_proba(test_b));
  return averaged(Strategy::kFeatureSplit, {"all_blocks", "structured"},
                  std::move(members), cfg.threshold);
}

EnsembleResult bootstrap(const FeatureMatrix& train, std::span<const int> y,
                         const FeatureMatrix& test, const EnsembleConfig& cfg) {
  check_training(train, y, test);
  const auto draws = bootstrap_draws(y, cfg.bootstrap_members, cfg.sample_fraction,
                                     cfg.with_replacement, cfg.seed);
  std::vector<std::string> names;
  std::vector<std::vector<double>> members;
  for (std::size_t m = 0; m < draws.size(); ++m) {
    const auto rows = train.select_rows(draws[m]);
    const auto labels = subset(y, draws[m]);
    members.push_back(LogRegModel::train(rows, labels, cfg.logreg).predict_proba(test));
    names.push_back(fmt::format("logreg_{}", m));
  }
  return averaged(Strategy::kBootstrap, std::move(names), std::move(members),
                  cfg.threshold);
}

EnsembleResult heterogeneous(const FeatureMatrix& train, std::span<const int> y,
                             const FeatureMatrix& test, const EnsembleConfig& cfg) {
  check_training(train, y, test);
  return averaged(Strategy::kHeterogeneous, kBaseNames,
                  base_probabilities(train, y, test, cfg), cfg.threshold);
}

EnsembleResult instance(const FeatureMatrix& train, std::span<const int> y,
                        const FeatureMatrix& test, const EnsembleConfig& cfg) {
  check_training(train, y, test);
  if (cfg.instance_C.size() < 2) throw ConfigError("instance ensemble needs two C values");
  std::vector<std::string> names;
  std::vector<std::vector<double>> members;
  for (double c : cfg.instance_C) {
    auto lr = cfg.logreg;
    lr.C = c;
    members.push_back(LogRegModel::train(train, y, lr).predict_proba(test));
    names.push_back(fmt::format("logreg_C{}", c));
  }
  return averaged(Strategy::kInstance, std::move(names), std::move(members),
                  cfg.threshold);
}

EnsembleResult stacking(const FeatureMatrix& train, std::span<const int> y,
                        const FeatureMatrix& test, const EnsembleConfig& cfg) {
  check_training(train, y, test);
  const std::size_t n = train.rows();
  Eigen::MatrixXd meta_train(static_cast<Eigen::Index>(n), 3);

  if (cfg.out_of_fold) {
    const auto fold = stratified_folds(y, cfg.folds, cfg.seed);
    for (std::size_t f = 0; f < cfg.folds; ++f) {
      std::vector<std::size_t> fit_rows, held_rows;
      for (std::size_t i = 0; i < n; ++i) (fold[i] == f ? held_rows : fit_rows).push_back(i);
      if (held_rows.empty()) continue;
      const auto fit_y = subset(y, fit_rows);
      const auto probs = base_probabilities(train.select_rows(fit_rows), fit_y,
                                            train.select_rows(held_rows), cfg);
      for (std::size_t b = 0; b < 3; ++b) {
        for (std::size_t k = 0; k < held_rows.size(); ++k) {
          meta_train(static_cast<Eigen::Index>(held_rows[k]), static_cast<Eigen::Index>(b)) =
              probs[b][k];
        }
      }
    }
  } else {
    const auto probs = base_probabilities(train, y, train, cfg);
    for (std::size_t b = 0; b < 3; ++b) {
      for (std::size_t i = 0; i < n; ++i) {
        meta_train(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b)) = probs[b][i];
      }
    }
  }

  auto members = base_probabilities(train, y, test, cfg);
  Eigen::MatrixXd meta_test(static_cast<Eigen::Index>(test.rows()), 3);
  for (std::size_t b = 0; b < 3; ++b) {
    for (std::size_t i = 0; i < test.rows(); ++i) {
      meta_test(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b)) = members[b][i];
    }
  }
  const auto meta = LogRegModel::train(
      FeatureMatrix::from_dense(meta_train, kBaseNames, ColumnGroup::kReduced), y,
      cfg.logreg);

  EnsembleResult r;
  r.strategy = Strategy::kStacking;
  r.member_names = kBaseNames;
  r.member_probs = std::move(members);
  r.probs = meta.predict_proba(
      FeatureMatrix::from_dense(meta_test, kBaseNames, ColumnGroup::kReduced));
  r.labels = threshold_labels(r.probs, cfg.threshold);
  return r;
}

EnsembleResult run(Strategy s, const FeatureMatrix& train, std::span<const int> y,
                   const FeatureMatrix& test, const EnsembleConfig& cfg) {
  switch (s) {
    case Strategy::kFeatureSplit: return feature_split(train, y, test, cfg);
    case Strategy::kBootstrap: return bootstrap(train, y, test, cfg);
    case Strategy::kHeterogeneous: return heterogeneous(train, y, test, cfg);
    case Strategy::kInstance: return instance(train, y, test, cfg);
    case Strategy::kStacking: return stacking(train, y, test, cfg);
  }
  throw ConfigError("unknown ensemble strategy");
}

std::string result_csv(const EnsembleResult& r) {
  std::string out = "row";
  for (const auto& name : r.member_names) out += "," + name;
  out += ",ensemble,label\n";
  for (std::size_t i = 0; i < r.probs.size(); ++i) {
    out += std::to_string(i);
    for (const auto& m : r.member_probs) out += fmt::format(",{:.17g}", m[i]);
    out += fmt::format(",{:.17g},{}\n", r.probs[i], r.labels[i]);
  }
  return out;
}

}  // namespace vulntriage::ensemble
