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
#include "vulntriage/feature_matrix.hpp"
#include "vulntriage/reduce.hpp"

namespace vulntriage::reduce {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = n(rng);
  return m;
}

FeatureMatrix text(const MatrixXd& m) { return FeatureMatrix::from_dense(m, "t", ColumnGroup::kText); }

oracle::Matrix to_oracle(const MatrixXd& m) {
  oracle::Matrix out(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

double population_variance(const VectorXd& v) {
  return (v.array() - v.mean()).square().mean();
}

TEST(Svd, OrthonormalComponents) {
  for (unsigned seed = 0; seed < 5; ++seed) {
    const auto svd = SvdModel::fit(text(random_matrix(30, 12, seed)), 6, seed);
    const MatrixXd gram = svd.components() * svd.components().transpose();
    EXPECT_LT((gram - MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Svd, SingularValuesMatchJacobiEigenvaluesOfGram) {
  const MatrixXd x = random_matrix(6, 5, 11);
  const auto svd = SvdModel::fit(text(x), 4, 3);
  const auto eig = oracle::jacobi_eigenvalues(oracle::gram(to_oracle(x)));
  for (Eigen::Index c = 0; c < 4; ++c) {
    EXPECT_LT(oracle::relative_error(svd.singular_values()(c), std::sqrt(eig[c])), 1e-6) << c;
  }
}

TEST(Svd, RandomizedPathAgreesOnLowRankData) {
  const MatrixXd x = random_matrix(80, 5, 1) * random_matrix(5, 40, 2);
  const auto exact = SvdModel::fit(text(x), 5, 9);
  SvdOptions opts;
  opts.force_randomized = true;
  const auto fast = SvdModel::fit(text(x), 5, 9, opts);
  EXPECT_TRUE(fast.used_randomized());
  EXPECT_FALSE(exact.used_randomized());
  for (Eigen::Index c = 0; c < 5; ++c) {
    EXPECT_LT(oracle::relative_error(exact.singular_values()(c), fast.singular_values()(c)), 1e-8);
  }
  // Full-rank reconstruction of rank-5 data is exact.
  const MatrixXd back = exact.project(x) * exact.components();
  EXPECT_LT((back - x).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Svd, ExplainedVarianceCurveIsMonotoneAndBounded) {
  const MatrixXd x = random_matrix(40, 10, 5).cwiseAbs();
  const auto svd = SvdModel::fit(text(x), 8, 1);
  const auto curve = explained_variance_curve(svd, text(x));
  ASSERT_EQ(curve.size(), 8u);
  double prev = 0.0;
  for (double v : curve) {
    EXPECT_GE(v, prev - 1e-15);
    prev = v;
  }
  EXPECT_LE(curve.back(), 1.0 + 1e-12);
  const MatrixXd p = svd.project(x);
  double total = 0.0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) total += population_variance(x.col(j));
  EXPECT_NEAR(svd.explained_variance_ratio()(0), population_variance(p.col(0)) / total, 1e-12);
}

TEST(Svd, SparseAndDenseInputsAgreeAndJsonRoundTrips) {
  MatrixXd x = random_matrix(20, 8, 4);
  x = (x.array() > 0.5).select(x, 0.0);
  const auto svd = SvdModel::fit(text(x), 3, 2);
  EXPECT_LT((svd.project(text(x)) - svd.project(x)).cwiseAbs().maxCoeff(), 1e-12);
  const auto back = SvdModel::from_json(svd.to_json());
  EXPECT_EQ(back.components(), svd.components());
  EXPECT_EQ(back.singular_values(), svd.singular_values());
}

TEST(Svd, Deterministic) {
  const auto x = text(random_matrix(25, 9, 8));
  EXPECT_EQ(SvdModel::fit(x, 4, 77).components(), SvdModel::fit(x, 4, 77).components());
}

TEST(Svd, TopTermsFollowLoadings) {
  MatrixXd x = MatrixXd::Zero(4, 3);
  x(0, 2) = 5;
  x(1, 2) = 4;
  x(2, 0) = 1;
  const std::vector<std::string> vocab{"alpha", "beta", "gamma"};
  const auto svd = SvdModel::fit(text(x), 1, 0);
  const auto top = top_terms_per_component(svd, vocab, 1, 1);
  ASSERT_EQ(top.size(), 1u);
  EXPECT_EQ(top[0], std::vector<std::string>{"gamma"});
}

TEST(Pca, EigenvaluesMatchJacobiOnCovariance) {
  const MatrixXd x = random_matrix(15, 4, 21);
  const auto pca = PcaModel::fit(x, 3);
  const MatrixXd centered = x.rowwise() - x.colwise().mean();
  auto cov = oracle::gram(to_oracle(centered));
  for (auto& r : cov)
    for (auto& v : r) v /= 14.0;
  const auto eig = oracle::jacobi_eigenvalues(cov);
  for (Eigen::Index c = 0; c < 3; ++c) EXPECT_NEAR(pca.eigenvalues()(c), eig[c], 1e-9);
  double trace = 0;
  for (std::size_t i = 0; i < 4; ++i) trace += cov[i][i];
  EXPECT_NEAR(pca.total_variance(), trace, 1e-9);
}

TEST(Pca, WideDataPathMatchesNarrowEigenvalues) {
  const MatrixXd x = random_matrix(6, 10, 3);
  const auto wide = PcaModel::fit(x, 4);
  const MatrixXd centered = x.rowwise() - x.colwise().mean();
  const auto eig = oracle::jacobi_eigenvalues(oracle::gram(to_oracle(centered)));
  for (Eigen::Index c = 0; c < 4; ++c) EXPECT_NEAR(wide.eigenvalues()(c), eig[c] / 5.0, 1e-9);
}

TEST(Pca, ProjectionsAreCenteredAndUncorrelated) {
  const MatrixXd x = random_matrix(50, 6, 13);
  const auto pca = PcaModel::fit(x, 4);
  const MatrixXd p = pca.project(x);
  EXPECT_LT(p.colwise().mean().cwiseAbs().maxCoeff(), 1e-10);
  const MatrixXd cov = p.transpose() * p / 49.0;
  for (Eigen::Index a = 0; a < 4; ++a) {
    EXPECT_NEAR(cov(a, a), pca.eigenvalues()(a), 1e-9);
    for (Eigen::Index b = 0; b < a; ++b) EXPECT_NEAR(cov(a, b), 0.0, 1e-9);
  }
}

TEST(Pca, RankErrors) {
  const MatrixXd x = random_matrix(5, 3, 1);
  EXPECT_THROW(PcaModel::fit(x, 0), RankError);
  EXPECT_THROW(PcaModel::fit(x, 4), RankError);
  EXPECT_THROW(PcaModel::fit(random_matrix(3, 8, 1), 3), RankError);
}

double fisher_ratio(const MatrixXd& x, const std::vector<int>& y, const VectorXd& w) {
  const VectorXd p = x * w;
  double m[2] = {0, 0}, n[2] = {0, 0};
  for (std::size_t i = 0; i < y.size(); ++i) {
    m[y[i]] += p(static_cast<Eigen::Index>(i));
    n[y[i]] += 1;
  }
  m[0] /= n[0];
  m[1] /= n[1];
  double within = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    within += std::pow(p(static_cast<Eigen::Index>(i)) - m[y[i]], 2);
  }
  return std::pow(m[1] - m[0], 2) / within;
}

TEST(Lda, DirectionMaximisesFisherRatio) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 1.0);
  MatrixXd x = random_matrix(60, 4, 31);
  std::vector<int> y(60);
  for (int i = 0; i < 60; ++i) {
    y[i] = i % 2;
    x(i, 1) += 2.0 * y[i];
    x(i, 2) -= 1.0 * y[i];
  }
  const auto lda = LdaModel::fit(x, y);
  const double best = fisher_ratio(x, y, lda.projection());
  for (int t = 0; t < 500; ++t) {
    VectorXd w(4);
    for (auto& v : w) v = n(rng);
    EXPECT_LE(fisher_ratio(x, y, w), best * (1 + 1e-6));
  }
  const VectorXd proj = lda.project(x).col(0);
  double m0 = 0, m1 = 0;
  for (int i = 0; i < 60; ++i) (y[i] ? m1 : m0) += proj(i) / 30.0;
  EXPECT_GT(m1, m0);
}

TEST(Lda, ProjectionHasUnitPooledWithinClassVariance) {
  const MatrixXd x = random_matrix(40, 3, 2);
  std::vector<int> y(40);
  for (int i = 0; i < 40; ++i) y[i] = i < 15;
  const auto lda = LdaModel::fit(x, y);
  const VectorXd p = x * lda.projection();
  double within = 0;
  for (int c = 0; c < 2; ++c) {
    double mean = 0, count = 0;
    for (int i = 0; i < 40; ++i)
      if (y[i] == c) mean += p(i), count += 1;
    mean /= count;
    for (int i = 0; i < 40; ++i)
      if (y[i] == c) within += std::pow(p(i) - mean, 2);
  }
  EXPECT_NEAR(within / 38.0, 1.0, 1e-9);
}

TEST(Lda, SingularScatterFallsBackToRidge) {
  MatrixXd x = random_matrix(20, 3, 5);
  x.col(2) = x.col(0);  // collinear
  std::vector<int> y(20);
  for (int i = 0; i < 20; ++i) y[i] = i % 2;
  const auto lda = LdaModel::fit(x, y);
  EXPECT_GT(lda.ridge(), 0.0);
  EXPECT_TRUE(lda.projection().allFinite());
}

TEST(Svd, DiagonalMatrixHasItsDiagonalAsSingularValues) {
  MatrixXd x = MatrixXd::Zero(3, 3);
  x.diagonal() << 3.0, 2.0, 1.0;
  const auto svd = SvdModel::fit(text(x), 2, 0);
  EXPECT_NEAR(svd.singular_values()(0), 3.0, 1e-12);
  EXPECT_NEAR(svd.singular_values()(1), 2.0, 1e-12);
  const MatrixXd zero = MatrixXd::Zero(1, 3);
  EXPECT_EQ(svd.project(zero), MatrixXd::Zero(1, 2));
}

TEST(Svd, RankOneCurveIsSaturated) {
  const MatrixXd x = random_matrix(7, 1, 3) * random_matrix(1, 5, 4);
  const auto svd = SvdModel::fit(text(x), 3, 0);
  for (double v : explained_variance_curve(svd, text(x))) EXPECT_NEAR(v, 1.0, 1e-10);
}

TEST(Svd, CenteredRatiosFollowSquaredSingularValues) {
  MatrixXd x = MatrixXd::Zero(3, 3);
  x.diagonal() << 3.0, 2.0, 1.0;
  const MatrixXd centered = x.rowwise() - x.colwise().mean();
  const auto svd = SvdModel::fit(text(centered), 2, 0);
  const auto eig = oracle::jacobi_eigenvalues(oracle::gram(to_oracle(centered)));
  const double total = eig[0] + eig[1] + eig[2];
  EXPECT_NEAR(svd.explained_variance_ratio()(0), eig[0] / total, 1e-10);
  EXPECT_NEAR(svd.explained_variance_ratio()(1), eig[1] / total, 1e-10);
}

TEST(Svd, TopTermsClampAndBreakTiesByColumn) {
  MatrixXd x = MatrixXd::Zero(2, 4);
  x.row(0) << 1.0, 1.0, 1.0, 1.0;
  x.row(1) << 0.0, 0.0, 0.0, 0.5;
  const std::vector<std::string> vocab{"a", "b", "c", "d"};
  const auto svd = SvdModel::fit(text(x), 2, 0);
  const auto top = top_terms_per_component(svd, vocab, 10, 4);
  ASSERT_EQ(top.size(), 2u);
  // Columns a, b, c load identically on every component.
  const auto& first = top[0];
  std::vector<std::string> abc;
  for (const auto& t : first)
    if (t != "d") abc.push_back(t);
  EXPECT_EQ(abc, (std::vector<std::string>{"a", "b", "c"}));
}

TEST(Pca, DiagonalCloudAndMeanProjection) {
  MatrixXd x(3, 2);
  x << 0, 0, 1, 1, 2, 2;
  const auto pca = PcaModel::fit(x, 1);
  EXPECT_NEAR(std::abs(pca.components()(0, 0)), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(pca.components()(0, 0), pca.components()(0, 1), 1e-12);
  const MatrixXd mean = pca.mean().transpose();
  EXPECT_NEAR(pca.project(mean).norm(), 0.0, 1e-15);
}

TEST(Pca, RefitOnOwnSubspaceRecoversIt) {
  // Distinct spectrum: scale columns so eigenvalues are well separated.
  MatrixXd x = random_matrix(200, 5, 8);
  const Eigen::VectorXd scale = (Eigen::VectorXd(5) << 5.0, 3.0, 2.0, 1.0, 0.5).finished();
  x = x * scale.asDiagonal();
  const auto pca = PcaModel::fit(x, 3);
  const MatrixXd back = (pca.project(x) * pca.components()).rowwise() + pca.mean().transpose();
  const auto again = PcaModel::fit(back, 3);
  // Cosines of the principal angles are the singular values of A Bᵀ.
  Eigen::JacobiSVD<MatrixXd> angles(pca.components() * again.components().transpose());
  for (Eigen::Index i = 0; i < 3; ++i) {
    EXPECT_NEAR(std::acos(std::min(1.0, angles.singularValues()(i))), 0.0, 1e-6);
  }
}

TEST(Lda, SeparatedBlobsProjectFarApart) {
  MatrixXd x = 0.3 * random_matrix(80, 2, 9);
  std::vector<int> y(80);
  for (int i = 0; i < 80; ++i) {
    y[i] = i >= 40;
    if (y[i]) x.row(i) += Eigen::RowVector2d(3.0, 3.0);
  }
  const auto lda = LdaModel::fit(x, y);
  const Eigen::VectorXd p = lda.project(x).col(0);
  const double gap = p.tail(40).mean() - p.head(40).mean();
  const double sd = std::sqrt(0.5 * (population_variance(p.head(40)) + population_variance(p.tail(40))));
  EXPECT_GT(gap, 5.0 * sd);

  const auto scaled = LdaModel::fit(10.0 * x, y);
  const Eigen::VectorXd q = scaled.project(10.0 * x).col(0);
  EXPECT_GT(q.tail(40).mean(), q.head(40).mean());
  for (int i = 0; i < 80; ++i)
    for (int j = 0; j < 80; ++j) {
      if (p(i) < p(j) - 1e-9) {
        ASSERT_LT(q(i), q(j));
      }
    }
}

TEST(Lda, IdenticalClassesStayFinite) {
  MatrixXd x = MatrixXd::Ones(6, 3);
  std::vector<int> y{0, 1, 0, 1, 0, 1};
  const auto lda = LdaModel::fit(x, y);
  EXPECT_TRUE(lda.projection().allFinite());
  EXPECT_TRUE(lda.project(x).allFinite());
}

TEST(Lda, Errors) {
  const MatrixXd x = random_matrix(4, 2, 1);
  EXPECT_THROW(LdaModel::fit(x, std::vector<int>{1, 1, 1, 1}), FitError);
  EXPECT_THROW(LdaModel::fit(x, std::vector<int>{1, 0, 1}), ShapeError);
  EXPECT_THROW(LdaModel::fit(x, std::vector<int>{1, 0, 2, 0}), DomainError);
}

}  // namespace
}  // namespace vulntriage::reduce
