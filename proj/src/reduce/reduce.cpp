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

#include "vulntriage/reduce.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "vulntriage/error.hpp"
#include "vulntriage/random.hpp"

namespace vulntriage::reduce {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// X * M for sparse X (n x d) and dense M (d x l).
MatrixXd times(const FeatureMatrix& x, const MatrixXd& m) {
  MatrixXd out = MatrixXd::Zero(static_cast<Index>(x.rows()), m.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = x.row(i);
    for (std::size_t k = 0; k < r.cols.size(); ++k) {
      out.row(static_cast<Index>(i)) += r.values[k] * m.row(r.cols[k]);
    }
  }
  return out;
}

// X^T * M for sparse X (n x d) and dense M (n x l).
MatrixXd transpose_times(const FeatureMatrix& x, const MatrixXd& m) {
  MatrixXd out = MatrixXd::Zero(static_cast<Index>(x.cols()), m.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = x.row(i);
    for (std::size_t k = 0; k < r.cols.size(); ++k) {
      out.row(r.cols[k]) += r.values[k] * m.row(static_cast<Index>(i));
    }
  }
  return out;
}

MatrixXd orthonormal_basis(const MatrixXd& y) {
  Eigen::HouseholderQR<MatrixXd> qr(y);
  return qr.householderQ() * MatrixXd::Identity(y.rows(), y.cols());
}

// Flip each row so its largest-magnitude entry is positive (first on ties).
void normalize_signs(MatrixXd& rows) {
  for (Index r = 0; r < rows.rows(); ++r) {
    Index best = 0;
    for (Index c = 1; c < rows.cols(); ++c) {
      if (std::abs(rows(r, c)) > std::abs(rows(r, best))) best = c;
    }
    if (rows(r, best) < 0) rows.row(r) *= -1.0;
  }
}

// Per-column population variance summed over columns.
double total_column_variance(const FeatureMatrix& x) {
  const double n = static_cast<double>(x.rows());
  if (x.rows() == 0) return 0.0;
  std::vector<double> sum(x.cols(), 0.0), sq(x.cols(), 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = x.row(i);
    for (std::size_t k = 0; k < r.cols.size(); ++k) {
      sum[r.cols[k]] += r.values[k];
      sq[r.cols[k]] += r.values[k] * r.values[k];
    }
  }
  double total = 0.0;
  for (std::size_t j = 0; j < x.cols(); ++j) {
    const double mean = sum[j] / n;
    total += std::max(0.0, sq[j] / n - mean * mean);
  }
  return total;
}

double population_variance(const VectorXd& v) {
  if (v.size() == 0) return 0.0;
  const double mean = v.mean();
  return (v.array() - mean).square().mean();
}

}  // namespace

nlohmann::json matrix_to_json(const MatrixXd& m) {
  auto rows = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(m.cols());
    for (Index j = 0; j < m.cols(); ++j) row[j] = m(i, j);
    rows.push_back(row);
  }
  return rows;
}

MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto n = static_cast<Index>(j.size());
  const auto d = n ? static_cast<Index>(j.at(0).size()) : 0;
  MatrixXd m(n, d);
  for (Index i = 0; i < n; ++i) {
    if (static_cast<Index>(j[i].size()) != d) throw ShapeError("ragged matrix");
    for (Index c = 0; c < d; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

SvdModel SvdModel::fit(const FeatureMatrix& x, std::size_t k, std::uint64_t seed,
                       const SvdOptions& options) {
  const std::size_t limit = std::min(x.rows(), x.cols());
  if (k == 0 || k > limit) {
    throw RankError(fmt::format("SVD rank {} outside [1, min(n, d) = {}]", k,
                                limit));
  }
  SvdModel model;
  if (limit <= options.exact_threshold && !options.force_randomized) {
    Eigen::BDCSVD<MatrixXd> svd(x.dense(), Eigen::ComputeThinV);
    model.components_ = svd.matrixV().leftCols(static_cast<Index>(k)).transpose();
    model.singular_values_ = svd.singularValues().head(static_cast<Index>(k));
  } else {
    // Randomized range finder with subspace (power) iterations.
    const auto l = static_cast<Index>(std::min(k + options.oversampling, limit));
    Rng rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    MatrixXd omega(static_cast<Index>(x.cols()), l);
    for (Index c = 0; c < l; ++c) {
      for (Index r = 0; r < omega.rows(); ++r) omega(r, c) = gauss(rng);
    }
    MatrixXd q = orthonormal_basis(times(x, omega));
    for (std::size_t it = 0; it < options.power_iterations; ++it) {
      MatrixXd z = orthonormal_basis(transpose_times(x, q));
      q = orthonormal_basis(times(x, z));
    }
    MatrixXd b = transpose_times(x, q).transpose();  // l x d
    Eigen::BDCSVD<MatrixXd> svd(b, Eigen::ComputeThinV);
    model.components_ = svd.matrixV().leftCols(static_cast<Index>(k)).transpose();
    model.singular_values_ = svd.singularValues().head(static_cast<Index>(k));
    model.randomized_ = true;
  }
  normalize_signs(model.components_);

  const double total = total_column_variance(x);
  const MatrixXd projected = model.project(x);
  model.ratio_ = VectorXd::Zero(static_cast<Index>(k));
  if (total > 0.0) {
    for (Index c = 0; c < projected.cols(); ++c) {
      model.ratio_(c) = population_variance(projected.col(c)) / total;
    }
  }
  return model;
}

MatrixXd SvdModel::project(const FeatureMatrix& x) const {
  if (x.cols() != input_dim()) {
    throw ShapeError(fmt::format("SVD expects {} columns, got {}", input_dim(),
                                 x.cols()));
  }
  return times(x, components_.transpose());
}

MatrixXd SvdModel::project(const MatrixXd& x) const {
  if (static_cast<std::size_t>(x.cols()) != input_dim()) {
    throw ShapeError("SVD projection width mismatch");
  }
  return x * components_.transpose();
}

nlohmann::json SvdModel::to_json() const {
  return {{"type", "truncated_svd"},
          {"components", matrix_to_json(components_)},
          {"singular_values", std::vector<double>(singular_values_.data(),
                                                  singular_values_.data() +
                                                      singular_values_.size())},
          {"explained_variance_ratio",
           std::vector<double>(ratio_.data(), ratio_.data() + ratio_.size())},
          {"randomized", randomized_}};
}

SvdModel SvdModel::from_json(const nlohmann::json& j) {
  SvdModel m;
  m.components_ = matrix_from_json(j.at("components"));
  auto sv = j.at("singular_values").get<std::vector<double>>();
  auto ratio = j.at("explained_variance_ratio").get<std::vector<double>>();
  m.singular_values_ = Eigen::Map<VectorXd>(sv.data(), static_cast<Index>(sv.size()));
  m.ratio_ = Eigen::Map<VectorXd>(ratio.data(), static_cast<Index>(ratio.size()));
  m.randomized_ = j.value("randomized", false);
  return m;
}

std::vector<double> explained_variance_curve(const SvdModel& svd,
                                             const FeatureMatrix& x) {
  const double total = total_column_variance(x);
  const MatrixXd projected = svd.project(x);
  std::vector<double> curve;
  double acc = 0.0;
  for (Index c = 0; c < projected.cols(); ++c) {
    if (total > 0.0) acc += population_variance(projected.col(c)) / total;
    curve.push_back(std::min(acc, 1.0));
  }
  return curve;
}

std::vector<std::vector<std::string>> top_terms_per_component(
    const SvdModel& svd, std::span<const std::string> vocabulary,
    std::size_t components, std::size_t terms) {
  if (vocabulary.size() != svd.input_dim()) {
    throw ShapeError("vocabulary size differs from SVD input width");
  }
  components = std::min(components, svd.rank());
  terms = std::min(terms, vocabulary.size());
  std::vector<std::vector<std::string>> out;
  for (std::size_t c = 0; c < components; ++c) {
    const auto row = svd.components().row(static_cast<Index>(c));
    std::vector<std::size_t> order(vocabulary.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::abs(row(static_cast<Index>(a))) > std::abs(row(static_cast<Index>(b)));
    });
    std::vector<std::string> top;
    for (std::size_t t = 0; t < terms; ++t) top.push_back(vocabulary[order[t]]);
    out.push_back(std::move(top));
  }
  return out;
}

PcaModel PcaModel::fit(const MatrixXd& x, std::size_t k) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto d = static_cast<std::size_t>(x.cols());
  if (n < 2 || k == 0 || k > std::min(n - 1, d)) {
    throw RankError(fmt::format("PCA rank {} outside [1, min(n - 1, d)] for a "
                                "{} x {} matrix", k, n, d));
  }
  PcaModel model;
  model.mean_ = x.colwise().mean().transpose();
  const MatrixXd centered = x.rowwise() - model.mean_.transpose();
  const double denom = static_cast<double>(n - 1);
  const auto kk = static_cast<Index>(k);
  if (d <= n) {
    const MatrixXd cov = (centered.transpose() * centered) / denom;
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov);
    const auto& values = eig.eigenvalues();     // ascending
    const auto& vectors = eig.eigenvectors();
    model.components_.resize(kk, static_cast<Index>(d));
    model.eigenvalues_.resize(kk);
    for (Index c = 0; c < kk; ++c) {
      const Index src = static_cast<Index>(d) - 1 - c;
      model.components_.row(c) = vectors.col(src).transpose();
      model.eigenvalues_(c) = std::max(0.0, values(src));
    }
    model.total_variance_ = cov.trace();
  } else {
    // Same eigensystem through the thin SVD of the centered data.
    Eigen::BDCSVD<MatrixXd> svd(centered, Eigen::ComputeThinV);
    model.components_ = svd.matrixV().leftCols(kk).transpose();
    model.eigenvalues_ = svd.singularValues().head(kk).array().square() / denom;
    model.total_variance_ = centered.squaredNorm() / denom;
  }
  normalize_signs(model.components_);
  return model;
}

MatrixXd PcaModel::project(const MatrixXd& x) const {
  if (x.cols() != mean_.size()) throw ShapeError("PCA projection width mismatch");
  return (x.rowwise() - mean_.transpose()) * components_.transpose();
}

nlohmann::json PcaModel::to_json() const {
  return {{"type", "pca"},
          {"mean", std::vector<double>(mean_.data(), mean_.data() + mean_.size())},
          {"components", matrix_to_json(components_)},
          {"eigenvalues", std::vector<double>(eigenvalues_.data(),
                                              eigenvalues_.data() +
                                                  eigenvalues_.size())},
          {"total_variance", total_variance_}};
}

PcaModel PcaModel::from_json(const nlohmann::json& j) {
  PcaModel m;
  auto mean = j.at("mean").get<std::vector<double>>();
  auto ev = j.at("eigenvalues").get<std::vector<double>>();
  m.mean_ = Eigen::Map<VectorXd>(mean.data(), static_cast<Index>(mean.size()));
  m.eigenvalues_ = Eigen::Map<VectorXd>(ev.data(), static_cast<Index>(ev.size()));
  m.components_ = matrix_from_json(j.at("components"));
  m.total_variance_ = j.value("total_variance", 0.0);
  return m;
}

LdaModel LdaModel::fit(const MatrixXd& x, std::span<const int> y) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw ShapeError("LDA: row count differs from label count");
  }
  const Index d = x.cols();
  std::array<std::vector<Index>, 2> members;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 0 && y[i] != 1) throw DomainError("LDA labels must be 0/1");
    members[y[i]].push_back(static_cast<Index>(i));
  }
  if (members[0].empty() || members[1].empty()) {
    throw FitError("LDA needs both classes present");
  }
  LdaModel model;
  model.class_means_ = MatrixXd::Zero(2, d);
  for (int c = 0; c < 2; ++c) {
    for (auto i : members[c]) model.class_means_.row(c) += x.row(i);
    model.class_means_.row(c) /= static_cast<double>(members[c].size());
  }
  model.overall_mean_ = x.colwise().mean().transpose();

  MatrixXd scatter = MatrixXd::Zero(d, d);
  for (int c = 0; c < 2; ++c) {
    MatrixXd centered(static_cast<Index>(members[c].size()), d);
    for (std::size_t r = 0; r < members[c].size(); ++r) {
      centered.row(static_cast<Index>(r)) =
          x.row(members[c][r]) - model.class_means_.row(c);
    }
    scatter.noalias() += centered.transpose() * centered;
  }
  const double trace = scatter.trace();
  model.ridge_ = 1e-6 * (trace > 0.0 ? trace / static_cast<double>(d) : 1.0);
  MatrixXd regularized = scatter;
  regularized.diagonal().array() += model.ridge_;

  const VectorXd diff =
      (model.class_means_.row(1) - model.class_means_.row(0)).transpose();
  VectorXd w = regularized.ldlt().solve(diff);
  if (!w.allFinite() || w.norm() == 0.0) {
    w = VectorXd::Zero(d);
    w(0) = 1.0;
  }
  w.normalize();
  if (diff.dot(w) < 0.0) w = -w;

  const auto dof = static_cast<double>(y.size()) - 2.0;
  const double within = dof > 0.0 ? w.dot(scatter * w) / dof : 0.0;
  if (within > 0.0 && std::isfinite(within)) w /= std::sqrt(within);
  model.projection_ = w;
  return model;
}

MatrixXd LdaModel::project(const MatrixXd& x) const {
  if (x.cols() != projection_.size()) {
    throw ShapeError("LDA projection width mismatch");
  }
  return (x.rowwise() - overall_mean_.transpose()) * projection_;
}

nlohmann::json LdaModel::to_json() const {
  return {{"type", "lda"},
          {"projection", std::vector<double>(projection_.data(),
                                             projection_.data() +
                                                 projection_.size())},
          {"class_means", matrix_to_json(class_means_)},
          {"overall_mean", std::vector<double>(overall_mean_.data(),
                                               overall_mean_.data() +
                                                   overall_mean_.size())},
          {"ridge", ridge_}};
}

LdaModel LdaModel::from_json(const nlohmann::json& j) {
  LdaModel m;
  auto p = j.at("projection").get<std::vector<double>>();
  auto mu = j.at("overall_mean").get<std::vector<double>>();
  m.projection_ = Eigen::Map<VectorXd>(p.data(), static_cast<Index>(p.size()));
  m.overall_mean_ = Eigen::Map<VectorXd>(mu.data(), static_cast<Index>(mu.size()));
  m.class_means_ = matrix_from_json(j.at("class_means"));
  m.ridge_ = j.value("ridge", 0.0);
  return m;
}

}  // namespace vulntriage::reduce
