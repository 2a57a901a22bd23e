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

#ifndef VULNTRIAGE_FEATURE_MATRIX_HPP_
#define VULNTRIAGE_FEATURE_MATRIX_HPP_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace vulntriage {

enum class ColumnGroup { kVendor, kIndicator, kText, kReduced };

std::string_view group_name(ColumnGroup group);
std::optional<ColumnGroup> group_from_name(std::string_view name);

using SparseEntry = std::pair<std::uint32_t, double>;
using SparseRow = std::vector<SparseEntry>;

// Row-major sparse matrix (CSR) whose columns carry a name and a group tag.
// Explicit zeros are never stored.
class FeatureMatrix {
 public:
  struct RowView {
    std::span<const std::uint32_t> cols;
    std::span<const double> values;
  };

  FeatureMatrix() = default;

  // Entries are sorted per row, duplicate columns summed and zeros dropped.
  static FeatureMatrix from_rows(std::vector<SparseRow> rows,
                                 std::vector<std::string> names,
                                 std::vector<ColumnGroup> groups);
  static FeatureMatrix from_dense(const Eigen::MatrixXd& dense,
                                  std::vector<std::string> names,
                                  ColumnGroup group);
  // Columns named prefix0, prefix1, ...
  static FeatureMatrix from_dense(const Eigen::MatrixXd& dense,
                                  std::string_view prefix, ColumnGroup group);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return names_.size(); }
  std::size_t nnz() const { return values_.size(); }

  RowView row(std::size_t i) const;
  double at(std::size_t i, std::size_t j) const;

  const std::vector<std::string>& names() const { return names_; }
  const std::vector<ColumnGroup>& groups() const { return groups_; }
  // "<group>:<name>"
  std::string qualified_name(std::size_t j) const;

  std::vector<std::size_t> columns_in(ColumnGroup group) const;
  bool has_group(ColumnGroup group) const;

  Eigen::MatrixXd dense() const;
  double row_norm(std::size_t i, std::optional<ColumnGroup> group = {}) const;

  FeatureMatrix select_columns(std::span<const std::size_t> cols) const;
  FeatureMatrix select_rows(std::span<const std::size_t> rows) const;
  FeatureMatrix select_groups(std::initializer_list<ColumnGroup> groups) const;

  // y = X w
  std::vector<double> multiply(std::span<const double> w) const;
  // out += X^T r
  void add_transpose_multiply(std::span<const double> r,
                              std::span<double> out) const;

  nlohmann::json to_json() const;
  static FeatureMatrix from_json(const nlohmann::json& j);

  // Sparse triplet text format: a header with n, d and the per-column group
  // map, then one "row,col,value" line per stored entry.
  void write_triplets(std::ostream& out) const;
  static FeatureMatrix read_triplets(std::istream& in);

  bool operator==(const FeatureMatrix&) const = default;

 private:
  friend FeatureMatrix assemble(std::span<const FeatureMatrix> blocks);

  std::size_t rows_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::uint32_t> col_index_;
  std::vector<double> values_;
  std::vector<std::string> names_;
  std::vector<ColumnGroup> groups_;
};

// Horizontal concatenation in the given block order. Throws ShapeError when
// row counts differ.
FeatureMatrix assemble(std::span<const FeatureMatrix> blocks);
FeatureMatrix assemble(std::initializer_list<FeatureMatrix> blocks);

}  // namespace vulntriage

#endif  // VULNTRIAGE_FEATURE_MATRIX_HPP_
