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

#ifndef VULNTRIAGE_CLASSICAL_HPP_
#define VULNTRIAGE_CLASSICAL_HPP_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "vulntriage/feature_matrix.hpp"

namespace vulntriage::classical {

// Any trained binary model that yields P(y = 1 | x) per row.
class Classifier {
 public:
  virtual ~Classifier() = default;

  // Throws ShapeError when x has a different width than the training data.
  virtual std::vector<double> predict_proba(const FeatureMatrix& x) const = 0;
  virtual std::string kind() const = 0;
  virtual std::size_t input_dim() const = 0;
  virtual nlohmann::json to_json() const = 0;

  std::vector<int> predict(const FeatureMatrix& x, double threshold = 0.5) const;
};

std::unique_ptr<Classifier> classifier_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Logistic regression

struct LogRegConfig {
  double C = 1.0;  // inverse regularization strength
  std::size_t max_iter = 1000;
  double tol = 1e-6;  // on the gradient infinity-norm
};

// Mean binary cross-entropy plus ||w||^2 / (2 C n); the bias is not
// penalized.
double logreg_objective(const FeatureMatrix& x, std::span<const int> y,
                        std::span<const double> w, double b, double C);

// Gradient of logreg_objective. Returns the bias component; the weight
// components are written to grad_w.
double logreg_gradient(const FeatureMatrix& x, std::span<const int> y,
                       std::span<const double> w, double b, double C,
                       std::span<double> grad_w);

class LogRegModel final : public Classifier {
 public:
  // Full-batch gradient descent from zero with Barzilai-Borwein trial steps
  // and step-halving (Armijo) backtracking, so the objective never increases.
  static LogRegModel train(const FeatureMatrix& x, std::span<const int> y,
                           const LogRegConfig& config = {});

  LogRegModel(std::vector<double> weights, double bias, double C);

  std::vector<double> predict_proba(const FeatureMatrix& x) const override;
  std::string kind() const override { return "logreg"; }
  std::size_t input_dim() const override { return weights_.size(); }
  nlohmann::json to_json() const override;
  static LogRegModel from_json(const nlohmann::json& j);

  const std::vector<double>& weights() const { return weights_; }
  double bias() const { return bias_; }
  double C() const { return C_; }
  std::size_t iterations() const { return iterations_; }
  bool converged() const { return converged_; }
  // Objective after each accepted step (first entry: at the zero start).
  const std::vector<double>& loss_history() const { return loss_history_; }

 private:
  std::vector<double> weights_;
  double bias_ = 0.0;
  double C_ = 1.0;
  std::size_t iterations_ = 0;
  bool converged_ = false;
  std::vector<double> loss_history_;
};

struct Coefficient {
  std::size_t index = 0;
  std::string name;
  double weight = 0.0;
};

// n largest (descending) and n smallest (ascending) weights with names.
std::pair<std::vector<Coefficient>, std::vector<Coefficient>> top_coefficients(
    const LogRegModel& model, std::span<const std::string> names,
    std::size_t n = 10);

// ---------------------------------------------------------------------------
// Decision tree

struct TreeConfig {
  std::optional<std::size_t> max_depth;  // unlimited when empty
  std::size_t min_samples_leaf = 1;
  // Features inspected per split; 0 means all. When fewer than all, features
  // are visited in a seeded random order until this many non-constant ones
  // have been evaluated.
  std::size_t max_features = 0;
  std::uint64_t seed = 0;
};

class TreeModel final : public Classifier {
 public:
  struct Node {
    int feature = -1;  // -1 for leaves
    double threshold = 0.0;  // x[feature] <= threshold goes left
    int left = -1;
    int right = -1;
    std::size_t count0 = 0;
    std::size_t count1 = 0;

    bool is_leaf() const { return feature < 0; }
    bool operator==(const Node&) const = default;
  };

  // Greedy Gini splitting. Split candidates are midpoints between consecutive
  // distinct values; the best weighted child impurity wins, ties resolved in
  // favour of the earlier feature (in visit order) and then the lower
  // threshold. A node becomes a leaf when pure, at max_depth, or when no
  // split satisfies min_samples_leaf.
  static TreeModel train(const FeatureMatrix& x, std::span<const int> y,
                         const TreeConfig& config = {});
  // Trains on the given (possibly repeated) row indices.
  static TreeModel train(const FeatureMatrix& x, std::span<const int> y,
                         std::span<const std::size_t> rows,
                         const TreeConfig& config);

  TreeModel(std::vector<Node> nodes, std::size_t input_dim);

  std::vector<double> predict_proba(const FeatureMatrix& x) const override;
  std::string kind() const override { return "tree"; }
  std::size_t input_dim() const override { return input_dim_; }
  nlohmann::json to_json() const override;
  static TreeModel from_json(const nlohmann::json& j);

  const std::vector<Node>& nodes() const { return nodes_; }
  // Index of the leaf that row i of x falls into.
  std::size_t leaf_for(const FeatureMatrix& x, std::size_t i) const;
  std::size_t depth() const;

 private:
  std::vector<Node> nodes_;
  std::size_t input_dim_ = 0;
};

// ---------------------------------------------------------------------------
// Random forest

struct ForestConfig {
  std::size_t n_trees = 100;
  // Fraction of features inspected per split; empty means floor(sqrt(d)).
  std::optional<double> feature_fraction;
  bool bootstrap = true;
  std::optional<std::size_t> max_depth;
  std::size_t min_samples_leaf = 1;
  std::uint64_t seed = 0;
};

class ForestModel final : public Classifier {
 public:
  static ForestModel train(const FeatureMatrix& x, std::span<const int> y,
                           const ForestConfig& config = {});

  ForestModel(std::vector<TreeModel> trees, std::vector<std::uint64_t> seeds,
              std::size_t features_per_split);

  // Arithmetic mean of the member trees' probabilities.
  std::vector<double> predict_proba(const FeatureMatrix& x) const override;
  std::string kind() const override { return "forest"; }
  std::size_t input_dim() const override;
  nlohmann::json to_json() const override;
  static ForestModel from_json(const nlohmann::json& j);

  const std::vector<TreeModel>& trees() const { return trees_; }
  const std::vector<std::uint64_t>& seeds() const { return seeds_; }
  std::size_t features_per_split() const { return features_per_split_; }

 private:
  std::vector<TreeModel> trees_;
  std::vector<std::uint64_t> seeds_;
  std::size_t features_per_split_ = 0;
};

// ---------------------------------------------------------------------------
// k-nearest neighbours

class KnnModel final : public Classifier {
 public:
  // Throws ConfigError when k is 0 or exceeds the training size.
  static KnnModel train(FeatureMatrix x, std::vector<int> y, std::size_t k = 5);

  // Fraction of class-1 labels among the k Euclidean-nearest training rows;
  // equal distances go to the lower training index.
  std::vector<double> predict_proba(const FeatureMatrix& x) const override;
  std::string kind() const override { return "knn"; }
  std::size_t input_dim() const override { return train_x_.cols(); }
  nlohmann::json to_json() const override;
  static KnnModel from_json(const nlohmann::json& j);

  std::size_t k() const { return k_; }
  // Training indices of the k nearest rows to row i of x, nearest first.
  std::vector<std::size_t> neighbours(const FeatureMatrix& x, std::size_t i) const;

 private:
  FeatureMatrix train_x_;
  std::vector<int> train_y_;
  std::size_t k_ = 5;
};

double sigmoid(double z);

}  // namespace vulntriage::classical

#endif  // VULNTRIAGE_CLASSICAL_HPP_
