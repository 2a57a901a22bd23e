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

#ifndef VULNTRIAGE_REDUCE_HPP_
#define VULNTRIAGE_REDUCE_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "vulntriage/feature_matrix.hpp"

namespace vulntriage::reduce {

struct SvdOptions {
  std::size_t power_iterations = 7;
  std::size_t oversampling = 10;
  // Dense exact SVD is used when min(n, d) is at most this.
  std::size_t exact_threshold = 512;
  bool force_randomized = false;
};

// Rank-k truncated SVD of an uncentered (sparse) matrix, i.e. latent
// semantic analysis on a TF-IDF block. Components are sign-normalized so the
// largest-magnitude loading of each row is positive.
class SvdModel {
 public:
  static SvdModel fit(const FeatureMatrix& x, std::size_t k, std::uint64_t seed,
                      const SvdOptions& options = {});

  // x * components^T
  Eigen::MatrixXd project(const FeatureMatrix& x) const;
  Eigen::MatrixXd project(const Eigen::MatrixXd& x) const;

  const Eigen::MatrixXd& components() const { return components_; }  // k x d
  const Eigen::VectorXd& singular_values() const { return singular_values_; }
  const Eigen::VectorXd& explained_variance_ratio() const { return ratio_; }
  std::size_t rank() const { return static_cast<std::size_t>(components_.rows()); }
  std::size_t input_dim() const {
    return static_cast<std::size_t>(components_.cols());
  }
  bool used_randomized() const { return randomized_; }

  nlohmann::json to_json() const;
  static SvdModel from_json(const nlohmann::json& j);

 private:
  Eigen::MatrixXd components_;
  Eigen::VectorXd singular_values_;
  Eigen::VectorXd ratio_;
  bool randomized_ = false;
};

// Element i: variance of x along the first i+1 components over the total
// per-column variance of x. Non-decreasing, bounded by 1.
std::vector<double> explained_variance_curve(const SvdModel& svd,
                                             const FeatureMatrix& x);

// For each of the first `components` rows, the `terms` vocabulary entries with
// the largest |loading|, descending; ties go to the lower column index.
std::vector<std::vector<std::string>> top_terms_per_component(
    const SvdModel& svd, std::span<const std::string> vocabulary,
    std::size_t components = 10, std::size_t terms = 10);

class PcaModel {
 public:
  // Requires k <= min(n - 1, d).
  static PcaModel fit(const Eigen::MatrixXd& x, std::size_t k);

  // (x - mean) * components^T
  Eigen::MatrixXd project(const Eigen::MatrixXd& x) const;

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& components() const { return components_; }
  // Covariance eigenvalues (n - 1 denominator), descending.
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  double total_variance() const { return total_variance_; }

  nlohmann::json to_json() const;
  static PcaModel from_json(const nlohmann::json& j);

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd components_;
  Eigen::VectorXd eigenvalues_;
  double total_variance_ = 0.0;
};

// Binary Fisher discriminant with ridge 1e-6 * trace(Sw) / d on the
// within-class scatter. The direction is oriented so that the class-1 mean
// projects above the class-0 mean and scaled to unit pooled within-class
// variance.
class LdaModel {
 public:
  static LdaModel fit(const Eigen::MatrixXd& x, std::span<const int> y);

  // (x - overall mean) * projection, one column.
  Eigen::MatrixXd project(const Eigen::MatrixXd& x) const;

  const Eigen::VectorXd& projection() const { return projection_; }
  const Eigen::MatrixXd& class_means() const { return class_means_; }  // 2 x d
  double ridge() const { return ridge_; }

  nlohmann::json to_json() const;
  static LdaModel from_json(const nlohmann::json& j);

 private:
  Eigen::VectorXd projection_;
  Eigen::MatrixXd class_means_;
  Eigen::VectorXd overall_mean_;
  double ridge_ = 0.0;
};

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);

}  // namespace vulntriage::reduce

#endif  // VULNTRIAGE_REDUCE_HPP_
