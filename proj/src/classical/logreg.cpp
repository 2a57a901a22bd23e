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

namespace vulntriage::classical {

namespace {

double softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

void check_binary(const FeatureMatrix& x, std::span<const int> y) {
  if (x.rows() != y.size()) {
    throw ShapeError(fmt::format("{} rows but {} labels", x.rows(), y.size()));
  }
  bool has[2] = {false, false};
  for (int v : y) {
    if (v != 0 && v != 1) throw DomainError("labels must be 0 or 1");
    has[v] = true;
  }
  if (!has[0] || !has[1]) {
    throw FitError("logistic regression needs both classes present");
  }
}

double inf_norm(std::span<const double> g, double gb) {
  double m = std::abs(gb);
  for (double v : g) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::vector<int> Classifier::predict(const FeatureMatrix& x,
                                     double threshold) const {
  auto p = predict_proba(x);
  std::vector<int> labels(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) labels[i] = p[i] >= threshold ? 1 : 0;
  return labels;
}

double logreg_objective(const FeatureMatrix& x, std::span<const int> y,
                        std::span<const double> w, double b, double C) {
  const auto z = x.multiply(w);
  const double n = static_cast<double>(x.rows());
  double loss = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double zi = z[i] + b;
    loss += softplus(zi) - y[i] * zi;
  }
  double reg = 0.0;
  for (double v : w) reg += v * v;
  return loss / n + reg / (2.0 * C * n);
}

double logreg_gradient(const FeatureMatrix& x, std::span<const int> y,
                       std::span<const double> w, double b, double C,
                       std::span<double> grad_w) {
  const auto z = x.multiply(w);
  const double n = static_cast<double>(x.rows());
  std::vector<double> residual(z.size());
  double grad_b = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    residual[i] = (sigmoid(z[i] + b) - y[i]) / n;
    grad_b += residual[i];
  }
  for (std::size_t j = 0; j < w.size(); ++j) grad_w[j] = w[j] / (C * n);
  x.add_transpose_multiply(residual, grad_w);
  return grad_b;
}

LogRegModel::LogRegModel(std::vector<double> weights, double bias, double C)
    : weights_(std::move(weights)), bias_(bias), C_(C) {
  if (!(C > 0.0)) throw ConfigError("C must be positive");
}

LogRegModel LogRegModel::train(const FeatureMatrix& x, std::span<const int> y,
                               const LogRegConfig& config) {
  check_binary(x, y);
  if (!(config.C > 0.0)) throw ConfigError("C must be positive");
  const std::size_t d = x.cols();
  LogRegModel model(std::vector<double>(d, 0.0), 0.0, config.C);
  auto& w = model.weights_;
  double& b = model.bias_;

  std::vector<double> g(d), g_new(d), w_new(d);
  double gb = logreg_gradient(x, y, w, b, config.C, g);
  double f = logreg_objective(x, y, w, b, config.C);
  model.loss_history_.push_back(f);

  double step = 1.0;
  for (std::size_t it = 0; it < config.max_iter; ++it) {
    if (inf_norm(g, gb) < config.tol) {
      model.converged_ = true;
      break;
    }
    double g_sq = gb * gb;
    for (double v : g) g_sq += v * v;

    double t = step;
    double f_new = 0.0, b_new = 0.0;
    bool accepted = false;
    while (t > 1e-20) {
      for (std::size_t j = 0; j < d; ++j) w_new[j] = w[j] - t * g[j];
      b_new = b - t * gb;
      f_new = logreg_objective(x, y, w_new, b_new, config.C);
      if (f_new <= f - 1e-4 * t * g_sq) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;  // no further decrease representable

    const double gb_new = logreg_gradient(x, y, w_new, b_new, config.C, g_new);
    // Barzilai-Borwein trial step for the next iteration.
    double ss = 0.0, sy = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double s = w_new[j] - w[j];
      ss += s * s;
      sy += s * (g_new[j] - g[j]);
    }
    const double sb = b_new - b;
    ss += sb * sb;
    sy += sb * (gb_new - gb);
    step = sy > 0.0 ? std::clamp(ss / sy, 1e-10, 1e10) : 2.0 * t;

    w.swap(w_new);
    g.swap(g_new);
    b = b_new;
    gb = gb_new;
    f = f_new;
    model.loss_history_.push_back(f);
    ++model.iterations_;
  }
  if (!model.converged_ && inf_norm(g, gb) < config.tol) model.converged_ = true;
  return model;
}

std::vector<double> LogRegModel::predict_proba(const FeatureMatrix& x) const {
  if (x.cols() != weights_.size()) {
    throw ShapeError(fmt::format("logistic regression expects {} columns, got {}",
                                 weights_.size(), x.cols()));
  }
  auto z = x.multiply(weights_);
  for (auto& v : z) v = sigmoid(v + bias_);
  return z;
}

nlohmann::json LogRegModel::to_json() const {
  return {{"type", kind()}, {"weights", weights_}, {"bias", bias_}, {"C", C_},
          {"iterations", iterations_}, {"converged", converged_}};
}

LogRegModel LogRegModel::from_json(const nlohmann::json& j) {
  LogRegModel m(j.at("weights").get<std::vector<double>>(),
                j.at("bias").get<double>(), j.at("C").get<double>());
  m.iterations_ = j.value("iterations", std::size_t{0});
  m.converged_ = j.value("converged", false);
  return m;
}

std::pair<std::vector<Coefficient>, std::vector<Coefficient>> top_coefficients(
    const LogRegModel& model, std::span<const std::string> names, std::size_t n) {
  const auto& w = model.weights();
  if (names.size() != w.size()) {
    throw ShapeError("feature names differ in length from the weights");
  }
  std::vector<std::size_t> order(w.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });
  const std::size_t m = std::min(n, w.size());
  std::vector<Coefficient> pos, neg;
  for (std::size_t k = 0; k < m; ++k) {
    pos.push_back({order[k], names[order[k]], w[order[k]]});
    const auto j = order[order.size() - 1 - k];
    neg.push_back({j, names[j], w[j]});
  }
  return {pos, neg};
}

}  // namespace vulntriage::classical
