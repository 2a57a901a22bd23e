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
#include <numeric>

#include <fmt/format.h>

#include "vulntriage/classical.hpp"
#include "vulntriage/error.hpp"

namespace vulntriage::classical {

namespace {

double squared_distance(FeatureMatrix::RowView a, FeatureMatrix::RowView b) {
  double sum = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.cols.size() || j < b.cols.size()) {
    double diff;
    if (j == b.cols.size() || (i < a.cols.size() && a.cols[i] < b.cols[j])) {
      diff = a.values[i++];
    } else if (i == a.cols.size() || b.cols[j] < a.cols[i]) {
      diff = b.values[j++];
    } else {
      diff = a.values[i++] - b.values[j++];
    }
    sum += diff * diff;
  }
  return sum;
}

}  // namespace

KnnModel KnnModel::train(FeatureMatrix x, std::vector<int> y, std::size_t k) {
  if (x.rows() != y.size()) {
    throw ShapeError(fmt::format("{} rows but {} labels", x.rows(), y.size()));
  }
  if (k == 0 || k > x.rows()) {
    throw ConfigError(fmt::format("KNN k = {} must lie in [1, {}]", k, x.rows()));
  }
  for (int v : y) {
    if (v != 0 && v != 1) throw DomainError("labels must be 0 or 1");
  }
  KnnModel model;
  model.train_x_ = std::move(x);
  model.train_y_ = std::move(y);
  model.k_ = k;
  return model;
}

std::vector<std::size_t> KnnModel::neighbours(const FeatureMatrix& x,
                                              std::size_t i) const {
  if (x.cols() != train_x_.cols()) {
    throw ShapeError(fmt::format("KNN expects {} columns, got {}",
                                 train_x_.cols(), x.cols()));
  }
  const auto query = x.row(i);
  std::vector<std::pair<double, std::size_t>> dist(train_x_.rows());
  for (std::size_t t = 0; t < train_x_.rows(); ++t) {
    dist[t] = {squared_distance(query, train_x_.row(t)), t};
  }
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_),
                    dist.end());
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < k_; ++t) out.push_back(dist[t].second);
  return out;
}

std::vector<double> KnnModel::predict_proba(const FeatureMatrix& x) const {
  std::vector<double> p(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    std::size_t positives = 0;
    for (auto t : neighbours(x, i)) positives += static_cast<std::size_t>(train_y_[t]);
    p[i] = static_cast<double>(positives) / static_cast<double>(k_);
  }
  return p;
}

nlohmann::json KnnModel::to_json() const {
  return {{"type", kind()}, {"k", k_}, {"metric", "euclidean"},
          {"train_x", train_x_.to_json()}, {"train_y", train_y_}};
}

KnnModel KnnModel::from_json(const nlohmann::json& j) {
  return train(FeatureMatrix::from_json(j.at("train_x")),
               j.at("train_y").get<std::vector<int>>(), j.at("k").get<std::size_t>());
}

std::unique_ptr<Classifier> classifier_from_json(const nlohmann::json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "logreg") return std::make_unique<LogRegModel>(LogRegModel::from_json(j));
  if (type == "tree") return std::make_unique<TreeModel>(TreeModel::from_json(j));
  if (type == "forest") return std::make_unique<ForestModel>(ForestModel::from_json(j));
  if (type == "knn") return std::make_unique<KnnModel>(KnnModel::from_json(j));
  throw LookupError("unknown classifier type '" + type + "'");
}

}  // namespace vulntriage::classical
