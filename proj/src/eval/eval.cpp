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

#include "vulntriage/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "vulntriage/error.hpp"

namespace vulntriage::eval {

namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

double harmonic(double p, double r) { return ratio(2.0 * p * r, p + r); }

void require_binary(std::span<const int> v, const char* what) {
  for (int x : v) {
    if (x != 0 && x != 1) {
      throw DomainError(fmt::format("{} holds non-binary label {}", what, x));
    }
  }
}

}  // namespace

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw ShapeError(fmt::format("y_true has {} entries, y_pred {}", y_true.size(),
                                 y_pred.size()));
  }
  require_binary(y_true, "y_true");
  require_binary(y_pred, "y_pred");
  ConfusionMatrix m;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] == 1) {
      ++(y_pred[i] == 1 ? m.tp : m.fn);
    } else {
      ++(y_pred[i] == 1 ? m.fp : m.tn);
    }
  }
  return m;
}

EvalReport report(std::span<const int> y_true, std::span<const int> y_pred,
                  std::optional<std::span<const double>> probs) {
  EvalReport r;
  r.matrix = confusion(y_true, y_pred);
  const auto& m = r.matrix;
  const double tp = static_cast<double>(m.tp), tn = static_cast<double>(m.tn);
  const double fp = static_cast<double>(m.fp), fn = static_cast<double>(m.fn);
  r.accuracy = ratio(tp + tn, static_cast<double>(m.total()));

  auto& pos = r.per_class[1];
  pos.precision = ratio(tp, tp + fp);
  pos.recall = ratio(tp, tp + fn);
  pos.f1 = harmonic(pos.precision, pos.recall);
  pos.support = m.tp + m.fn;

  auto& neg = r.per_class[0];
  neg.precision = ratio(tn, tn + fn);
  neg.recall = ratio(tn, tn + fp);
  neg.f1 = harmonic(neg.precision, neg.recall);
  neg.support = m.tn + m.fp;

  r.precision_macro = (pos.precision + neg.precision) / 2.0;
  r.recall_macro = (pos.recall + neg.recall) / 2.0;
  r.f1_macro = (pos.f1 + neg.f1) / 2.0;

  if (probs) {
    if (probs->size() != y_true.size()) {
      throw ShapeError("probabilities are not aligned with labels");
    }
    r.auc = roc_auc(y_true, *probs).auc;
  }
  return r;
}

std::string classification_report(const EvalReport& r) {
  std::string out = fmt::format("{:>14}{:>11}{:>11}{:>11}{:>10}\n\n", "", "precision",
                                "recall", "f1-score", "support");
  for (int c = 0; c < 2; ++c) {
    const auto& k = r.per_class[static_cast<std::size_t>(c)];
    out += fmt::format("{:>14}{:>11.4f}{:>11.4f}{:>11.4f}{:>10}\n", c, k.precision,
                       k.recall, k.f1, k.support);
  }
  const std::size_t n = r.matrix.total();
  out += "\n";
  out += fmt::format("{:>14}{:>11}{:>11}{:>11.4f}{:>10}\n", "accuracy", "", "",
                     r.accuracy, n);
  out += fmt::format("{:>14}{:>11.4f}{:>11.4f}{:>11.4f}{:>10}\n", "macro avg",
                     r.precision_macro, r.recall_macro, r.f1_macro, n);
  if (r.auc) out += fmt::format("{:>14}{:>11}{:>11}{:>11.4f}\n", "roc auc", "", "", *r.auc);
  return out;
}

RocCurve roc_auc(std::span<const int> y_true, std::span<const double> scores) {
  if (y_true.size() != scores.size()) {
    throw ShapeError("scores are not aligned with labels");
  }
  require_binary(y_true, "y_true");
  std::size_t positives = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) throw DomainError("non-finite score");
    positives += static_cast<std::size_t>(y_true[i]);
  }
  const std::size_t negatives = y_true.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw DomainError("AUC is undefined when only one class is present");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::size_t tp = 0, fp = 0;
  double area = 0.0;
  for (std::size_t k = 0; k < order.size();) {
    const double s = scores[order[k]];
    const std::size_t tp0 = tp, fp0 = fp;
    for (; k < order.size() && scores[order[k]] == s; ++k) {
      ++(y_true[order[k]] == 1 ? tp : fp);
    }
    // Trapezoid in count space, normalized once at the end.
    area += static_cast<double>(fp - fp0) * static_cast<double>(tp + tp0) / 2.0;
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(negatives),
                            static_cast<double>(tp) / static_cast<double>(positives),
                            s});
  }
  curve.auc = area / (static_cast<double>(positives) * static_cast<double>(negatives));
  return curve;
}

std::string confusion_csv(const ConfusionMatrix& m) {
  return fmt::format("actual,predicted_0,predicted_1\n0,{},{}\n1,{},{}\n", m.tn, m.fp,
                     m.fn, m.tp);
}

std::string roc_csv(const RocCurve& curve) {
  std::string out = "fpr,tpr,threshold\n";
  for (const auto& p : curve.points) {
    out += fmt::format("{:.17g},{:.17g},{}\n", p.fpr, p.tpr,
                       std::isinf(p.threshold) ? std::string("inf")
                                               : fmt::format("{:.17g}", p.threshold));
  }
  return out;
}

// ---------------------------------------------------------------------------
// BenchmarkTable

void BenchmarkTable::add(std::string model, EvalReport report) {
  rows_.push_back({std::move(model), std::move(report), "ok"});
}

void BenchmarkTable::add_error(std::string model, std::string message) {
  rows_.push_back({std::move(model), std::nullopt, std::move(message)});
}

const BenchmarkRow& BenchmarkTable::row(std::string_view model) const {
  for (const auto& r : rows_) {
    if (r.model == model) return r;
  }
  throw LookupError(fmt::format("no benchmark row '{}'", model));
}

std::optional<double> BenchmarkTable::metric(const BenchmarkRow& row, std::size_t c) {
  if (!row.result) return std::nullopt;
  const auto& r = *row.result;
  switch (c) {
    case 1: return r.accuracy;
    case 2: return r.precision_macro;
    case 3: return r.recall_macro;
    case 4: return r.f1_macro;
    case 5: return r.auc;
    default: throw LookupError(fmt::format("no metric column {}", c));
  }
}

std::vector<std::size_t> BenchmarkTable::best_rows(std::size_t c) const {
  std::optional<double> best;
  for (const auto& r : rows_) {
    auto v = metric(r, c);
    if (v && (!best || *v > *best)) best = v;
  }
  std::vector<std::size_t> out;
  if (!best) return out;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (metric(rows_[i], c) == best) out.push_back(i);
  }
  return out;
}

namespace {

std::vector<std::vector<bool>> best_flags(const BenchmarkTable& t) {
  std::vector<std::vector<bool>> flags(t.rows().size(), std::vector<bool>(6, false));
  for (std::size_t c = 1; c < 6; ++c) {
    for (auto i : t.best_rows(c)) flags[i][c] = true;
  }
  return flags;
}

std::string cell(const BenchmarkRow& row, std::size_t c) {
  auto v = BenchmarkTable::metric(row, c);
  return v ? fmt::format("{:.4f}", *v) : std::string("-");
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

std::string BenchmarkTable::to_text() const {
  const auto flags = best_flags(*this);
  std::size_t name_width = 5;
  for (const auto& r : rows_) name_width = std::max(name_width, r.model.size());
  std::string out = fmt::format("{:<{}}", kColumns[0], name_width);
  for (std::size_t c = 1; c < 6; ++c) out += fmt::format("  {:>16}", kColumns[c]);
  out += "  status\n";
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    out += fmt::format("{:<{}}", rows_[i].model, name_width);
    for (std::size_t c = 1; c < 6; ++c) {
      out += fmt::format("  {:>16}", cell(rows_[i], c) + (flags[i][c] ? "*" : " "));
    }
    out += "  " + rows_[i].status + "\n";
  }
  out += "(* best in column)\n";
  return out;
}

std::string BenchmarkTable::to_csv() const {
  const auto flags = best_flags(*this);
  std::string out;
  for (auto c : kColumns) out += std::string(c) + ",";
  out += "status,best\n";
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    out += csv_field(rows_[i].model);
    std::string best;
    for (std::size_t c = 1; c < 6; ++c) {
      auto v = metric(rows_[i], c);
      out += v ? fmt::format(",{:.17g}", *v) : std::string(",");
      if (flags[i][c]) best += (best.empty() ? "" : ";") + std::string(kColumns[c]);
    }
    out += "," + csv_field(rows_[i].status) + "," + best + "\n";
  }
  return out;
}

std::string BenchmarkTable::to_markdown() const {
  const auto flags = best_flags(*this);
  std::string out = "|";
  for (auto c : kColumns) out += fmt::format(" {} |", c);
  out += " status |\n|---|";
  for (std::size_t c = 1; c < 6; ++c) out += "---:|";
  out += "---|\n";
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    out += "| " + rows_[i].model + " |";
    for (std::size_t c = 1; c < 6; ++c) {
      const auto v = cell(rows_[i], c);
      out += flags[i][c] ? " **" + v + "** |" : " " + v + " |";
    }
    out += " " + rows_[i].status + " |\n";
  }
  return out;
}

}  // namespace vulntriage::eval
