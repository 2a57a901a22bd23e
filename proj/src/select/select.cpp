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

#include "vulntriage/select.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "vulntriage/error.hpp"

namespace vulntriage::select {

namespace {

void check_labels(const FeatureMatrix& x, std::span<const int> y) {
  if (x.rows() != y.size()) throw ShapeError("row count differs from label count");
  for (int v : y) {
    if (v != 0 && v != 1) throw DomainError("labels must be 0 or 1");
  }
}

std::vector<std::size_t> ranking(const std::vector<double>& scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  return order;
}

double plogp_ratio(double pxy, double px, double py) {
  if (pxy <= 0.0) return 0.0;
  return pxy * std::log(pxy / (px * py));
}

}  // namespace

FeatureScores chi2_scores(const FeatureMatrix& x, std::span<const int> y) {
  check_labels(x, y);
  const std::size_t d = x.cols();
  std::array<std::vector<double>, 2> observed{std::vector<double>(d, 0.0),
                                              std::vector<double>(d, 0.0)};
  std::array<double, 2> count{0.0, 0.0};
  for (std::size_t i = 0; i < x.rows(); ++i) {
    count[y[i]] += 1.0;
    auto r = x.row(i);
    for (std::size_t k = 0; k < r.cols.size(); ++k) {
      if (r.values[k] < 0.0) throw DomainError("chi-square needs non-negative features");
      observed[y[i]][r.cols[k]] += r.values[k];
    }
  }
  const double n = count[0] + count[1];
  FeatureScores out{std::vector<double>(d, 0.0), ScoreMethod::kChi2, x.names()};
  if (n == 0.0) return out;
  for (std::size_t j = 0; j < d; ++j) {
    const double total = observed[0][j] + observed[1][j];
    double score = 0.0;
    for (int c = 0; c < 2; ++c) {
      const double expected = count[c] / n * total;
      if (expected > 0.0) {
        const double diff = observed[c][j] - expected;
        score += diff * diff / expected;
      }
    }
    out.scores[j] = score;
  }
  return out;
}

FeatureScores mutual_info_scores(const FeatureMatrix& x, std::span<const int> y) {
  check_labels(x, y);
  const std::size_t d = x.cols();
  std::array<std::vector<double>, 2> present{std::vector<double>(d, 0.0),
                                             std::vector<double>(d, 0.0)};
  std::array<double, 2> count{0.0, 0.0};
  for (std::size_t i = 0; i < x.rows(); ++i) {
    count[y[i]] += 1.0;
    auto r = x.row(i);
    for (std::size_t k = 0; k < r.cols.size(); ++k) present[y[i]][r.cols[k]] += 1.0;
  }
  const double n = count[0] + count[1];
  FeatureScores out{std::vector<double>(d, 0.0), ScoreMethod::kMutualInfo,
                    x.names()};
  if (n == 0.0) return out;
  const std::array<double, 2> py{count[0] / n, count[1] / n};
  for (std::size_t j = 0; j < d; ++j) {
    // joint[f][c]: f = presence, c = class
    const double p10 = present[0][j] / n, p11 = present[1][j] / n;
    const double p00 = py[0] - p10, p01 = py[1] - p11;
    const double pf1 = p10 + p11, pf0 = 1.0 - pf1;
    double mi = plogp_ratio(p00, pf0, py[0]) + plogp_ratio(p01, pf0, py[1]) +
                plogp_ratio(p10, pf1, py[0]) + plogp_ratio(p11, pf1, py[1]);
    out.scores[j] = std::max(0.0, mi);
  }
  return out;
}

std::vector<std::size_t> select_top_k(const FeatureScores& scores, std::size_t k) {
  if (k == 0) throw ConfigError("selection k must be >= 1");
  auto order = ranking(scores.scores);
  order.resize(std::min(k, order.size()));
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<std::pair<std::string, double>> top_scored_terms(
    const FeatureScores& scores, std::size_t n) {
  if (scores.names.size() != scores.scores.size()) {
    throw ShapeError("score names differ in length from scores");
  }
  auto order = ranking(scores.scores);
  order.resize(std::min(n, order.size()));
  std::vector<std::pair<std::string, double>> out;
  for (auto j : order) out.emplace_back(scores.names[j], scores.scores[j]);
  return out;
}

}  // namespace vulntriage::select
