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


#ifndef VULNTRIAGE_EVAL_HPP_
#define VULNTRIAGE_EVAL_HPP_

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vulntriage::eval {

struct ConfusionMatrix {
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tp = 0;

  std::size_t total() const { return tn + fp + fn + tp; }
  bool operator==(const ConfusionMatrix&) const = default;
};

// Throws ShapeError on length mismatch and DomainError on non-binary entries.
ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct EvalReport {
  ConfusionMatrix matrix;
  double accuracy = 0.0;
  std::array<ClassMetrics, 2> per_class;  // indexed by label
  double precision_macro = 0.0;
  double recall_macro = 0.0;
  double f1_macro = 0.0;
  std::optional<double> auc;
};

// Every ratio with a zero denominator is 0.
EvalReport report(std::span<const int> y_true, std::span<const int> y_pred,
                  std::optional<std::span<const double>> probs = std::nullopt);

// Per-class table in the familiar precision/recall/f1/support layout.
std::string classification_report(const EvalReport& r);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;  // +inf for the origin
};

struct RocCurve {
  std::vector<RocPoint> points;  // (0,0) first, (1,1) last
  double auc = 0.0;
};

// One point per distinct score in descending order, tied scores grouped.
// Throws DomainError when y_true holds one class or a score is not finite.
RocCurve roc_auc(std::span<const int> y_true, std::span<const double> scores);

std::string confusion_csv(const ConfusionMatrix& m);
std::string roc_csv(const RocCurve& curve);

// ---------------------------------------------------------------------------
// Benchmark tables

struct BenchmarkRow {
  std::string model;
  std::optional<EvalReport> result;  // empty for failed pipelines
  std::string status = "ok";         // "ok" or the failure message
};

class BenchmarkTable {
 public:
  static constexpr std::array<const char*, 6> kColumns = {
      "model", "accuracy", "precision_macro", "recall_macro", "f1_macro", "roc_auc"};

  void add(std::string model, EvalReport report);
  void add_error(std::string model, std::string message);

  const std::vector<BenchmarkRow>& rows() const { return rows_; }
  const BenchmarkRow& row(std::string_view model) const;

  // Metric value for column c in 1..5; empty for error rows or missing auc.
  static std::optional<double> metric(const BenchmarkRow& row, std::size_t c);
  // Indices of rows holding the column maximum (ties all flagged).
  std::vector<std::size_t> best_rows(std::size_t c) const;

  std::string to_text() const;
  std::string to_csv() const;
  std::string to_markdown() const;

 private:
  std::vector<BenchmarkRow> rows_;
};

}  // namespace vulntriage::eval

#endif  // VULNTRIAGE_EVAL_HPP_
