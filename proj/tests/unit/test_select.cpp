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

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "vulntriage/error.hpp"
#include "vulntriage/select.hpp"

namespace vulntriage::select {
namespace {

FeatureMatrix column_matrix(const std::vector<std::vector<double>>& cols) {
  const std::size_t n = cols.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cols[j][i];
    }
  }
  return FeatureMatrix::from_dense(m, "f", ColumnGroup::kText);
}

TEST(Chi2, PerfectIndicatorScoresFive) {
  const std::vector<int> y{1, 1, 1, 1, 1, 0, 0, 0, 0, 0};
  const auto s = chi2_scores(column_matrix({{1, 1, 1, 1, 1, 0, 0, 0, 0, 0}}), y);
  EXPECT_NEAR(s.scores[0], 5.0, 1e-12);
}

TEST(Chi2, DegenerateColumnsScoreZero) {
  const std::vector<int> y{1, 0, 1, 0};
  const auto s = chi2_scores(column_matrix({{1, 1, 1, 1}, {0, 0, 0, 0}, {2, 2, 2, 2}}), y);
  for (double v : s.scores) EXPECT_EQ(v, 0.0);
}

TEST(Chi2, NegativeEntryIsDomainError) {
  EXPECT_THROW(chi2_scores(column_matrix({{1, -1}}), std::vector<int>{1, 0}), DomainError);
}

TEST(MutualInfo, IdenticalFeatureIsLnTwo) {
  const std::vector<int> y{1, 1, 1, 1, 1, 0, 0, 0, 0, 0};
  const auto s = mutual_info_scores(column_matrix({{1, 1, 1, 1, 1, 0, 0, 0, 0, 0}}), y);
  EXPECT_NEAR(s.scores[0], std::log(2.0), 1e-12);
}

TEST(MutualInfo, IndependentAndConstantAreZero) {
  const std::vector<int> y{1, 1, 0, 0};
  const auto s = mutual_info_scores(column_matrix({{1, 0, 1, 0}, {3, 3, 3, 3}}), y);
  EXPECT_NEAR(s.scores[0], 0.0, 1e-15);
  EXPECT_NEAR(s.scores[1], 0.0, 1e-15);
}

// Every 0/1 feature and label vector of length 4..12 drawn at random.
TEST(ScoresOn2x2Designs, MatchBruteForce) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t n = 4 + rng() % 9;
    std::vector<int> y(n);
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(rng() % 2);
      f[i] = static_cast<double>(rng() % 2);
    }
    y[0] = 0;
    y[1] = 1;
    const auto x = column_matrix({f});
    ASSERT_NEAR(chi2_scores(x, y).scores[0], oracle::contingency_chi2(f, y), 1e-10);
    ASSERT_NEAR(mutual_info_scores(x, y).scores[0], oracle::presence_mi(f, y), 1e-10);
  }
}

TEST(Scores, RowPermutationAndDuplicateColumns) {
  const std::vector<int> y{1, 0, 1, 1, 0, 0};
  const std::vector<double> a{0.5, 0, 0.2, 0.9, 0.1, 0}, b{0, 1, 0, 0.3, 0.7, 0.2};
  const auto s = chi2_scores(column_matrix({a, b, a}), y);
  EXPECT_EQ(s.scores[0], s.scores[2]);
  const std::vector<std::size_t> perm{5, 3, 1, 0, 4, 2};
  std::vector<int> yp;
  std::vector<double> ap, bp;
  for (auto i : perm) {
    yp.push_back(y[i]);
    ap.push_back(a[i]);
    bp.push_back(b[i]);
  }
  const auto sp = chi2_scores(column_matrix({ap, bp, ap}), yp);
  const auto m = mutual_info_scores(column_matrix({a, b}), y);
  const auto mp = mutual_info_scores(column_matrix({ap, bp}), yp);
  for (std::size_t j = 0; j < 2; ++j) {
    EXPECT_NEAR(sp.scores[j], s.scores[j], 1e-12);
    EXPECT_NEAR(mp.scores[j], m.scores[j], 1e-12);
  }
}

FeatureScores make_scores(std::vector<double> v) {
  FeatureScores s;
  s.scores = std::move(v);
  for (std::size_t j = 0; j < s.scores.size(); ++j) s.names.push_back("t" + std::to_string(j));
  return s;
}

TEST(SelectTopK, Examples) {
  EXPECT_EQ(select_top_k(make_scores({3, 1, 2}), 2), (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(select_top_k(make_scores({1, 1, 1}), 1), (std::vector<std::size_t>{0}));
  EXPECT_EQ(select_top_k(make_scores({1, 4}), 300).size(), 2u);
  EXPECT_THROW(select_top_k(make_scores({1}), 0), ConfigError);
}

TEST(TopScoredTerms, RanksAndClamps) {
  auto s = make_scores({0, 0, 2.5, 0});
  s.names[2] = "code execution";
  const auto top = top_scored_terms(s, 20);
  ASSERT_EQ(top.size(), 4u);
  EXPECT_EQ(top[0].first, "code execution");
  EXPECT_EQ(top[1].first, "t0");
}

}  // namespace
}  // namespace vulntriage::select
