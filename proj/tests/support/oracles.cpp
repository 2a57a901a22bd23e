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

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>

namespace vulntriage::oracle {

std::vector<double> jacobi_eigenvalues(Matrix a) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    }
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a[i][i];
  std::sort(eig.rbegin(), eig.rend());
  return eig;
}

Matrix gram(const Matrix& x) {
  const std::size_t d = x.empty() ? 0 : x[0].size();
  Matrix g(d, std::vector<double>(d, 0.0));
  for (const auto& row : x) {
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) g[i][j] += row[i] * row[j];
    }
  }
  return g;
}

double pairwise_auc(const std::vector<int>& y, const std::vector<double>& scores) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double keep = x[k];
    x[k] = keep + h;
    const double up = f(x);
    x[k] = keep - h;
    const double down = f(x);
    x[k] = keep;
    g[k] = (up - down) / (2.0 * h);
  }
  return g;
}

double relative_error(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

MacroMetrics macro_metrics(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
  double tp = 0, tn = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i], q = y_pred[i];
    tp += t && q;
    tn += !t && !q;
    fp += !t && q;
    fn += t && !q;
  }
  auto safe = [](double num, double den) { return den > 0 ? num / den : 0.0; };
  const double p1 = safe(tp, tp + fp), r1 = safe(tp, tp + fn);
  const double p0 = safe(tn, tn + fn), r0 = safe(tn, tn + fp);
  const double f1 = safe(2 * p1 * r1, p1 + r1), f0 = safe(2 * p0 * r0, p0 + r0);
  return {(tp + tn) / static_cast<double>(y_true.size()), (p0 + p1) / 2, (r0 + r1) / 2,
          (f0 + f1) / 2};
}

double contingency_chi2(const std::vector<double>& f, const std::vector<int>& y) {
  double mass[2] = {0, 0}, count[2] = {0, 0}, total = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    mass[y[i]] += f[i];
    count[y[i]] += 1;
    total += f[i];
  }
  const double n = static_cast<double>(y.size());
  double chi = 0;
  for (int c = 0; c < 2; ++c) {
    const double expected = count[c] / n * total;
    if (expected > 0) chi += (mass[c] - expected) * (mass[c] - expected) / expected;
  }
  return chi;
}

double presence_mi(const std::vector<double>& f, const std::vector<int>& y) {
  const double n = static_cast<double>(y.size());
  double joint[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < y.size(); ++i) joint[f[i] != 0 ? 1 : 0][y[i]] += 1 / n;
  auto h = [](std::initializer_list<double> ps) {
    double s = 0;
    for (double p : ps)
      if (p > 0) s -= p * std::log(p);
    return s;
  };
  const double hx = h({joint[0][0] + joint[0][1], joint[1][0] + joint[1][1]});
  const double hy = h({joint[0][0] + joint[1][0], joint[0][1] + joint[1][1]});
  const double hxy = h({joint[0][0], joint[0][1], joint[1][0], joint[1][1]});
  return hx + hy - hxy;
}

std::vector<std::map<std::string, double>> tfidf_by_hand(
    const std::vector<std::vector<std::string>>& grams) {
  std::map<std::string, int> df;
  for (const auto& g : grams) {
    std::set<std::string> seen(g.begin(), g.end());
    for (const auto& t : seen) ++df[t];
  }
  const double n = static_cast<double>(grams.size());
  std::vector<std::map<std::string, double>> out;
  for (const auto& g : grams) {
    std::map<std::string, double> w;
    for (const auto& t : g) w[t] += 1.0;
    double norm = 0.0;
    for (auto& [t, v] : w) {
      v *= std::log((1.0 + n) / (1.0 + df[t])) + 1.0;
      norm += v * v;
    }
    for (auto& [t, v] : w) v /= std::sqrt(norm);
    out.push_back(std::move(w));
  }
  return out;
}

namespace {

double gini(int c0, int c1) {
  const double n = c0 + c1;
  if (n == 0) return 0.0;
  const double p0 = c0 / n, p1 = c1 / n;
  return 1.0 - p0 * p0 - p1 * p1;
}

int grow(const Matrix& x, const std::vector<int>& y, const std::vector<std::size_t>& rows,
         std::vector<OracleNode>& nodes) {
  OracleNode node;
  for (auto r : rows) (y[r] == 1 ? node.count1 : node.count0)++;
  const int id = static_cast<int>(nodes.size());
  nodes.push_back(node);
  if (node.count0 == 0 || node.count1 == 0) return id;

  const double n = static_cast<double>(rows.size());
  double best = std::numeric_limits<double>::infinity();
  int best_f = -1;
  double best_t = 0.0;
  for (std::size_t f = 0; f < x[0].size(); ++f) {
    std::set<double> values;
    for (auto r : rows) values.insert(x[r][f]);
    std::vector<double> v(values.begin(), values.end());
    for (std::size_t k = 0; k + 1 < v.size(); ++k) {
      double t = (v[k] + v[k + 1]) / 2.0;
      if (!(t < v[k + 1])) t = v[k];
      int l0 = 0, l1 = 0, r0 = 0, r1 = 0;
      for (auto r : rows) {
        if (x[r][f] <= t) (y[r] == 1 ? l1 : l0)++;
        else (y[r] == 1 ? r1 : r0)++;
      }
      const double score = ((l0 + l1) * gini(l0, l1) + (r0 + r1) * gini(r0, r1)) / n;
      if (score < best - 1e-12) {
        best = score;
        best_f = static_cast<int>(f);
        best_t = t;
      }
    }
  }
  if (best_f < 0) return id;
  std::vector<std::size_t> left, right;
  for (auto r : rows) (x[r][best_f] <= best_t ? left : right).push_back(r);
  nodes[id].feature = best_f;
  nodes[id].threshold = best_t;
  const int l = grow(x, y, left, nodes);
  const int r = grow(x, y, right, nodes);
  nodes[id].left = l;
  nodes[id].right = r;
  return id;
}

}  // namespace

std::vector<OracleNode> exhaustive_tree(const Matrix& x, const std::vector<int>& y) {
  std::vector<OracleNode> nodes;
  std::vector<std::size_t> rows(x.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  grow(x, y, rows, nodes);
  return nodes;
}

}  // namespace vulntriage::oracle
