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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "vulntriage/classical.hpp"
#include "vulntriage/error.hpp"
#include "vulntriage/random.hpp"

namespace vulntriage::classical {

namespace {

constexpr double kTieTolerance = 1e-12;

// Column-major dense copy of the training matrix, shared by all trees of a
// forest.
struct ColumnStore {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> data;  // data[j * n + i]

  explicit ColumnStore(const FeatureMatrix& x)
      : n(x.rows()), d(x.cols()), data(x.rows() * x.cols(), 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      auto r = x.row(i);
      for (std::size_t k = 0; k < r.cols.size(); ++k) {
        data[r.cols[k] * n + i] = r.values[k];
      }
    }
  }
  double at(std::size_t i, std::size_t j) const { return data[j * n + i]; }
};

double weighted_gini(double c0, double c1) {
  const double total = c0 + c1;
  if (total == 0.0) return 0.0;
  return total - (c0 * c0 + c1 * c1) / total;
}

class TreeBuilder {
 public:
  TreeBuilder(const ColumnStore& store, std::span<const int> y,
              const TreeConfig& config)
      : store_(store), y_(y), config_(config), rng_(config.seed) {}

  std::vector<TreeModel::Node> build(std::vector<std::size_t> rows) {
    grow(std::move(rows), 0);
    return std::move(nodes_);
  }

 private:
  struct Candidate {
    int feature = -1;
    double threshold = 0.0;
    double score = std::numeric_limits<double>::infinity();
  };

  int grow(std::vector<std::size_t> rows, std::size_t depth) {
    TreeModel::Node node;
    for (auto i : rows) (y_[i] ? node.count1 : node.count0)++;
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(node);

    const bool pure = node.count0 == 0 || node.count1 == 0;
    const bool depth_cap = config_.max_depth && depth >= *config_.max_depth;
    if (pure || depth_cap || rows.size() < 2 * config_.min_samples_leaf ||
        rows.size() < 2) {
      return id;
    }
    const Candidate best = best_split(rows);
    if (best.feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (auto i : rows) {
      (store_.at(i, static_cast<std::size_t>(best.feature)) <= best.threshold
           ? left
           : right)
          .push_back(i);
    }
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    nodes_[id].feature = best.feature;
    nodes_[id].threshold = best.threshold;
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  std::vector<std::size_t> visit_order() {
    std::vector<std::size_t> order(store_.d);
    std::iota(order.begin(), order.end(), 0);
    if (subsampling()) std::shuffle(order.begin(), order.end(), rng_);
    return order;
  }

  bool subsampling() const {
    return config_.max_features > 0 && config_.max_features < store_.d;
  }

  Candidate best_split(const std::vector<std::size_t>& rows) {
    Candidate best;
    const double n = static_cast<double>(rows.size());
    const std::size_t min_leaf = std::max<std::size_t>(1, config_.min_samples_leaf);
    std::size_t inspected = 0;
    std::vector<std::pair<double, int>> column(rows.size());
    double total1 = 0.0;
    for (auto i : rows) total1 += y_[i];
    const double total0 = n - total1;

    for (std::size_t f : visit_order()) {
      if (subsampling() && inspected >= config_.max_features) break;
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (std::size_t k = 0; k < rows.size(); ++k) {
        const double v = store_.at(rows[k], f);
        column[k] = {v, y_[rows[k]]};
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (lo == hi) continue;
      ++inspected;
      std::sort(column.begin(), column.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      double l0 = 0.0, l1 = 0.0;
      for (std::size_t k = 0; k + 1 < column.size(); ++k) {
        (column[k].second ? l1 : l0) += 1.0;
        if (column[k].first == column[k + 1].first) continue;
        const std::size_t n_left = k + 1;
        if (n_left < min_leaf || rows.size() - n_left < min_leaf) continue;
        const double score =
            (weighted_gini(l0, l1) + weighted_gini(total0 - l0, total1 - l1)) / n;
        if (score < best.score - kTieTolerance) {
          double thr = 0.5 * (column[k].first + column[k + 1].first);
          if (thr >= column[k + 1].first) thr = column[k].first;
          best = {static_cast<int>(f), thr, score};
        }
      }
    }
    return best;
  }

  const ColumnStore& store_;
  std::span<const int> y_;
  TreeConfig config_;
  Rng rng_;
  std::vector<TreeModel::Node> nodes_;
};

void check_rows_labels(const FeatureMatrix& x, std::span<const int> y) {
  if (x.rows() != y.size()) {
    throw ShapeError(fmt::format("{} rows but {} labels", x.rows(), y.size()));
  }
  for (int v : y) {
    if (v != 0 && v != 1) throw DomainError("labels must be 0 or 1");
  }
}

TreeModel train_on_store(const ColumnStore& store, std::span<const int> y,
                         std::vector<std::size_t> rows, const TreeConfig& config) {
  if (rows.empty()) throw FitError("decision tree needs at least one sample");
  TreeBuilder builder(store, y, config);
  return TreeModel(builder.build(std::move(rows)), store.d);
}

}  // namespace

TreeModel::TreeModel(std::vector<Node> nodes, std::size_t input_dim)
    : nodes_(std::move(nodes)), input_dim_(input_dim) {
  if (nodes_.empty()) throw ConfigError("tree has no nodes");
  for (const auto& node : nodes_) {
    if (!node.is_leaf() &&
        (node.left <= 0 || node.right <= 0 ||
         static_cast<std::size_t>(node.left) >= nodes_.size() ||
         static_cast<std::size_t>(node.right) >= nodes_.size() ||
         static_cast<std::size_t>(node.feature) >= input_dim_)) {
      throw ConfigError("malformed tree node");
    }
  }
}

TreeModel TreeModel::train(const FeatureMatrix& x, std::span<const int> y,
                           const TreeConfig& config) {
  std::vector<std::size_t> rows(x.rows());
  std::iota(rows.begin(), rows.end(), 0);
  return train(x, y, rows, config);
}

TreeModel TreeModel::train(const FeatureMatrix& x, std::span<const int> y,
                           std::span<const std::size_t> rows,
                           const TreeConfig& config) {
  check_rows_labels(x, y);
  if (x.rows() < 2) throw FitError("decision tree needs at least two samples");
  ColumnStore store(x);
  return train_on_store(store, y, {rows.begin(), rows.end()}, config);
}

std::size_t TreeModel::leaf_for(const FeatureMatrix& x, std::size_t i) const {
  std::size_t node = 0;
  while (!nodes_[node].is_leaf()) {
    const auto& nd = nodes_[node];
    node = static_cast<std::size_t>(
        x.at(i, static_cast<std::size_t>(nd.feature)) <= nd.threshold ? nd.left
                                                                      : nd.right);
  }
  return node;
}

std::size_t TreeModel::depth() const {
  std::vector<std::size_t> depth(nodes_.size(), 0);
  std::size_t max_depth = 0;
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    max_depth = std::max(max_depth, depth[k]);
    if (!nodes_[k].is_leaf()) {
      depth[static_cast<std::size_t>(nodes_[k].left)] = depth[k] + 1;
      depth[static_cast<std::size_t>(nodes_[k].right)] = depth[k] + 1;
    }
  }
  return max_depth;
}

std::vector<double> TreeModel::predict_proba(const FeatureMatrix& x) const {
  if (x.cols() != input_dim_) {
    throw ShapeError(fmt::format("tree expects {} columns, got {}", input_dim_,
                                 x.cols()));
  }
  std::vector<double> p(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto& leaf = nodes_[leaf_for(x, i)];
    p[i] = static_cast<double>(leaf.count1) /
           static_cast<double>(leaf.count0 + leaf.count1);
  }
  return p;
}

nlohmann::json TreeModel::to_json() const {
  auto nodes = nlohmann::json::array();
  for (const auto& n : nodes_) {
    nodes.push_back({n.feature, n.threshold, n.left, n.right, n.count0, n.count1});
  }
  return {{"type", kind()}, {"input_dim", input_dim_}, {"nodes", nodes}};
}

TreeModel TreeModel::from_json(const nlohmann::json& j) {
  std::vector<Node> nodes;
  for (const auto& e : j.at("nodes")) {
    nodes.push_back({e.at(0).get<int>(), e.at(1).get<double>(), e.at(2).get<int>(),
                     e.at(3).get<int>(), e.at(4).get<std::size_t>(),
                     e.at(5).get<std::size_t>()});
  }
  return TreeModel(std::move(nodes), j.at("input_dim").get<std::size_t>());
}

ForestModel::ForestModel(std::vector<TreeModel> trees,
                         std::vector<std::uint64_t> seeds,
                         std::size_t features_per_split)
    : trees_(std::move(trees)),
      seeds_(std::move(seeds)),
      features_per_split_(features_per_split) {
  if (trees_.empty()) throw ConfigError("forest needs at least one tree");
  if (seeds_.size() != trees_.size()) {
    throw ConfigError("forest needs one seed per tree");
  }
}

ForestModel ForestModel::train(const FeatureMatrix& x, std::span<const int> y,
                               const ForestConfig& config) {
  check_rows_labels(x, y);
  if (x.rows() < 2) throw FitError("random forest needs at least two samples");
  if (config.n_trees == 0) throw ConfigError("forest needs at least one tree");
  const std::size_t d = x.cols();
  std::size_t m = 0;
  if (config.feature_fraction) {
    if (!(*config.feature_fraction > 0.0 && *config.feature_fraction <= 1.0)) {
      throw ConfigError("feature fraction must lie in (0, 1]");
    }
    m = static_cast<std::size_t>(std::floor(*config.feature_fraction *
                                            static_cast<double>(d)));
  } else {
    m = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(d))));
  }
  m = std::clamp<std::size_t>(m, 1, std::max<std::size_t>(d, 1));

  ColumnStore store(x);
  std::vector<TreeModel> trees;
  std::vector<std::uint64_t> seeds;
  const std::size_t n = x.rows();
  for (std::size_t t = 0; t < config.n_trees; ++t) {
    const std::uint64_t seed = derive_seed(config.seed, "tree", t);
    std::vector<std::size_t> rows(n);
    if (config.bootstrap) {
      Rng rng(derive_seed(seed, "bootstrap"));
      std::uniform_int_distribution<std::size_t> draw(0, n - 1);
      for (auto& r : rows) r = draw(rng);
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    TreeConfig tc;
    tc.max_depth = config.max_depth;
    tc.min_samples_leaf = config.min_samples_leaf;
    tc.max_features = m >= d ? 0 : m;
    tc.seed = derive_seed(seed, "features");
    trees.push_back(train_on_store(store, y, std::move(rows), tc));
    seeds.push_back(seed);
  }
  return ForestModel(std::move(trees), std::move(seeds), m);
}

std::size_t ForestModel::input_dim() const { return trees_.front().input_dim(); }

std::vector<double> ForestModel::predict_proba(const FeatureMatrix& x) const {
  std::vector<double> sum(x.rows(), 0.0);
  for (const auto& tree : trees_) {
    const auto p = tree.predict_proba(x);
    for (std::size_t i = 0; i < p.size(); ++i) sum[i] += p[i];
  }
  for (auto& v : sum) v /= static_cast<double>(trees_.size());
  return sum;
}

nlohmann::json ForestModel::to_json() const {
  auto trees = nlohmann::json::array();
  for (const auto& t : trees_) trees.push_back(t.to_json());
  return {{"type", kind()}, {"features_per_split", features_per_split_},
          {"seeds", seeds_}, {"trees", trees}};
}

ForestModel ForestModel::from_json(const nlohmann::json& j) {
  std::vector<TreeModel> trees;
  for (const auto& t : j.at("trees")) trees.push_back(TreeModel::from_json(t));
  return ForestModel(std::move(trees),
                     j.at("seeds").get<std::vector<std::uint64_t>>(),
                     j.at("features_per_split").get<std::size_t>());
}

}  // namespace vulntriage::classical
