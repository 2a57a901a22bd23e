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

#ifndef VULNTRIAGE_SELECT_HPP_
#define VULNTRIAGE_SELECT_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vulntriage/feature_matrix.hpp"

namespace vulntriage::select {

enum class ScoreMethod { kChi2, kMutualInfo };

struct FeatureScores {
  std::vector<double> scores;
  ScoreMethod method = ScoreMethod::kChi2;
  std::vector<std::string> names;
};

// Chi-square between per-class feature mass and its class-prior expectation:
// obs_c = sum of x_ij over rows of class c, exp_c = prior_c * sum_i x_ij,
// score = sum_c (obs_c - exp_c)^2 / exp_c. Zero expected mass contributes 0.
// Throws DomainError on a negative entry.
FeatureScores chi2_scores(const FeatureMatrix& x, std::span<const int> y);

// Mutual information (nats) between nonzero presence of each feature and the
// label, from the empirical 2x2 joint.
FeatureScores mutual_info_scores(const FeatureMatrix& x, std::span<const int> y);

// Indices of the k largest scores (ties to the lower index), ascending;
// k is clamped to the score count.
std::vector<std::size_t> select_top_k(const FeatureScores& scores,
                                      std::size_t k = 300);

// (name, score) for the n best features, descending, same tie-break.
std::vector<std::pair<std::string, double>> top_scored_terms(
    const FeatureScores& scores, std::size_t n = 20);

}  // namespace vulntriage::select

#endif  // VULNTRIAGE_SELECT_HPP_
