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

#include "vulntriage/feature_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "vulntriage/error.hpp"

namespace vulntriage {

namespace {
constexpr std::string_view kTripletMagic = "%vulntriage-sparse v1";
}

std::string_view group_name(ColumnGroup group) {
  switch (group) {
    case ColumnGroup::kVendor: return "vendor";
    case ColumnGroup::kIndicator: return "indicator";
    case ColumnGroup::kText: return "text";
    case ColumnGroup::kReduced: return "reduced";
  }
  return "unknown";
}

std::optional<ColumnGroup> group_from_name(std::string_view name) {
  for (auto g : {ColumnGroup::kVendor, ColumnGroup::kIndicator,
                 ColumnGroup::kText, ColumnGroup::kReduced}) {
    if (group_name(g) == name) return g;
  }
  return std::nullopt;
}

FeatureMatrix FeatureMatrix::from_rows(std::vector<SparseRow> rows,
                                       std::vector<std::string> names,
                                       std::vector<ColumnGroup> groups) {
  if (names.size() != groups.size()) {
    throw ShapeError("column names and groups differ in length");
  }
  FeatureMatrix m;
  m.rows_ = rows.size();
  m.names_ = std::move(names);
  m.groups_ = std::move(groups);
  m.row_ptr_.reserve(rows.size() + 1);
  for (auto& row : rows) {
    std::sort(row.begin(), row.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t k = 0; k < row.size();) {
      const auto col = row[k].first;
      if (col >= m.names_.size()) {
        throw ShapeError(fmt::format("column {} out of range ({} columns)", col,
                                     m.names_.size()));
      }
      double sum = 0.0;
      for (; k < row.size() && row[k].first == col; ++k) sum += row[k].second;
      if (sum != 0.0) {
        m.col_index_.push_back(col);
        m.values_.push_back(sum);
      }
    }
    m.row_ptr_.push_back(m.values_.size());
  }
  return m;
}

FeatureMatrix FeatureMatrix::from_dense(const Eigen::MatrixXd& dense,
                                        std::vector<std::string> names,
                                        ColumnGroup group) {
  if (names.size() != static_cast<std::size_t>(dense.cols())) {
    throw ShapeError("dense matrix width differs from name count");
  }
  std::vector<SparseRow> rows(static_cast<std::size_t>(dense.rows()));
  for (Eigen::Index i = 0; i < dense.rows(); ++i) {
    for (Eigen::Index j = 0; j < dense.cols(); ++j) {
      if (dense(i, j) != 0.0) {
        rows[i].emplace_back(static_cast<std::uint32_t>(j), dense(i, j));
      }
    }
  }
  std::vector<ColumnGroup> groups(names.size(), group);
  return from_rows(std::move(rows), std::move(names), std::move(groups));
}

FeatureMatrix FeatureMatrix::from_dense(const Eigen::MatrixXd& dense,
                                        std::string_view prefix,
                                        ColumnGroup group) {
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < dense.cols(); ++j) {
    names.push_back(fmt::format("{}{}", prefix, j));
  }
  return from_dense(dense, std::move(names), group);
}

FeatureMatrix::RowView FeatureMatrix::row(std::size_t i) const {
  const auto b = row_ptr_[i];
  const auto e = row_ptr_[i + 1];
  return {std::span<const std::uint32_t>(col_index_).subspan(b, e - b),
          std::span<const double>(values_).subspan(b, e - b)};
}

double FeatureMatrix::at(std::size_t i, std::size_t j) const {
  auto r = row(i);
  auto it = std::lower_bound(r.cols.begin(), r.cols.end(), j);
  if (it == r.cols.end() || *it != j) return 0.0;
  return r.values[static_cast<std::size_t>(it - r.cols.begin())];
}

std::string FeatureMatrix::qualified_name(std::size_t j) const {
  return fmt::format("{}:{}", group_name(groups_[j]), names_[j]);
}

std::vector<std::size_t> FeatureMatrix::columns_in(ColumnGroup group) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < groups_.size(); ++j) {
    if (groups_[j] == group) out.push_back(j);
  }
  return out;
}

bool FeatureMatrix::has_group(ColumnGroup group) const {
  return std::find(groups_.begin(), groups_.end(), group) != groups_.end();
}

Eigen::MatrixXd FeatureMatrix::dense() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows_),
                                              static_cast<Eigen::Index>(cols()));
  for (std::size_t i = 0; i < rows_; ++i) {
    auto r = row(i);
    for (std::size_t k = 0; k < r.cols.size(); ++k) {
      out(static_cast<Eigen::Index>(i), r.cols[k]) = r.values[k];
    }
  }
  return out;
}

double FeatureMatrix::row_norm(std::size_t i,
                               std::optional<ColumnGroup> group) const {
  auto r = row(i);
  double sum = 0.0;
  for (std::size_t k = 0; k < r.cols.size(); ++k) {
    if (!group || groups_[r.cols[k]] == *group) sum += r.values[k] * r.values[k];
  }
  return std::sqrt(sum);
}

FeatureMatrix FeatureMatrix::select_columns(
    std::span<const std::size_t> cols) const {
  std::vector<std::int64_t> remap(this->cols(), -1);
  std::vector<std::string> names;
  std::vector<ColumnGroup> groups;
  for (std::size_t k = 0; k < cols.size(); ++k) {
    if (cols[k] >= this->cols()) throw ShapeError("column index out of range");
    remap[cols[k]] = static_cast<std::int64_t>(k);
    names.push_back(names_[cols[k]]);
    groups.push_back(groups_[cols[k]]);
  }
  std::vector<SparseRow> rows(rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    auto r = row(i);
    for (std::size_t k = 0; k < r.cols.size(); ++k) {
      if (remap[r.cols[k]] >= 0) {
        rows[i].emplace_back(static_cast<std::uint32_t>(remap[r.cols[k]]),
                             r.values[k]);
      }
    }
  }
  return from_rows(std::move(rows), std::move(names), std::move(groups));
}

FeatureMatrix FeatureMatrix::select_rows(
    std::span<const std::size_t> rows) const {
  FeatureMatrix m;
  m.names_ = names_;
  m.groups_ = groups_;
  m.rows_ = rows.size();
  for (auto i : rows) {
    if (i >= rows_) throw ShapeError("row index out of range");
    auto r = row(i);
    m.col_index_.insert(m.col_index_.end(), r.cols.begin(), r.cols.end());
    m.values_.insert(m.values_.end(), r.values.begin(), r.values.end());
    m.row_ptr_.push_back(m.values_.size());
  }
  return m;
}

FeatureMatrix FeatureMatrix::select_groups(
    std::initializer_list<ColumnGroup> groups) const {
  std::vector<std::size_t> cols;
  for (std::size_t j = 0; j < groups_.size(); ++j) {
    if (std::find(groups.begin(), groups.end(), groups_[j]) != groups.end()) {
      cols.push_back(j);
    }
  }
  return select_columns(cols);
}

std::vector<double> FeatureMatrix::multiply(std::span<const double> w) const {
  if (w.size() != cols()) throw ShapeError("vector length differs from width");
  std::vector<double> y(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      s += values_[k] * w[col_index_[k]];
    }
    y[i] = s;
  }
  return y;
}

void FeatureMatrix::add_transpose_multiply(std::span<const double> r,
                                           std::span<double> out) const {
  if (r.size() != rows_ || out.size() != cols()) {
    throw ShapeError("transpose product dimensions differ");
  }
  for (std::size_t i = 0; i < rows_; ++i) {
    if (r[i] == 0.0) continue;
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      out[col_index_[k]] += values_[k] * r[i];
    }
  }
}

nlohmann::json FeatureMatrix::to_json() const {
  nlohmann::json j;
  j["rows"] = rows_;
  j["cols"] = cols();
  j["names"] = names_;
  std::vector<std::string> groups;
  for (auto g : groups_) groups.emplace_back(group_name(g));
  j["groups"] = groups;
  auto entries = nlohmann::json::array();
  for (std::size_t i = 0; i < rows_; ++i) {
    auto r = row(i);
    for (std::size_t k = 0; k < r.cols.size(); ++k) {
      entries.push_back({i, r.cols[k], r.values[k]});
    }
  }
  j["entries"] = entries;
  return j;
}

FeatureMatrix FeatureMatrix::from_json(const nlohmann::json& j) {
  const auto n = j.at("rows").get<std::size_t>();
  auto names = j.at("names").get<std::vector<std::string>>();
  std::vector<ColumnGroup> groups;
  for (const auto& g : j.at("groups")) {
    auto group = group_from_name(g.get<std::string>());
    if (!group) throw ConfigError("unknown column group " + g.dump());
    groups.push_back(*group);
  }
  std::vector<SparseRow> rows(n);
  for (const auto& e : j.at("entries")) {
    auto i = e.at(0).get<std::size_t>();
    if (i >= n) throw ShapeError("entry row out of range");
    rows[i].emplace_back(e.at(1).get<std::uint32_t>(), e.at(2).get<double>());
  }
  return from_rows(std::move(rows), std::move(names), std::move(groups));
}

void FeatureMatrix::write_triplets(std::ostream& out) const {
  out << kTripletMagic << '\n';
  out << "n=" << rows_ << " d=" << cols() << " nnz=" << nnz() << '\n';
  for (std::size_t j = 0; j < cols(); ++j) {
    out << j << '\t' << group_name(groups_[j]) << '\t' << names_[j] << '\n';
  }
  out << "%data\n";
  for (std::size_t i = 0; i < rows_; ++i) {
    auto r = row(i);
    for (std::size_t k = 0; k < r.cols.size(); ++k) {
      out << fmt::format("{},{},{}\n", i, r.cols[k], r.values[k]);
    }
  }
}

FeatureMatrix FeatureMatrix::read_triplets(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTripletMagic) {
    throw Error("not a sparse triplet file");
  }
  std::size_t n = 0, d = 0, nnz = 0;
  if (!std::getline(in, line) ||
      std::sscanf(line.c_str(), "n=%zu d=%zu nnz=%zu", &n, &d, &nnz) != 3) {
    throw Error("malformed triplet header");
  }
  std::vector<std::string> names(d);
  std::vector<ColumnGroup> groups(d);
  for (std::size_t j = 0; j < d; ++j) {
    if (!std::getline(in, line)) throw Error("truncated group map");
    auto t1 = line.find('\t');
    auto t2 = line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos) {
      throw Error("malformed group map line: " + line);
    }
    auto group = group_from_name(line.substr(t1 + 1, t2 - t1 - 1));
    if (!group) throw Error("unknown group in line: " + line);
    groups[j] = *group;
    names[j] = line.substr(t2 + 1);
  }
  if (!std::getline(in, line) || line != "%data") throw Error("missing %data");
  std::vector<SparseRow> rows(n);
  for (std::size_t k = 0; k < nnz; ++k) {
    if (!std::getline(in, line)) throw Error("truncated triplet body");
    std::istringstream ss(line);
    std::size_t i = 0, j = 0;
    double v = 0;
    char c1 = 0, c2 = 0;
    if (!(ss >> i >> c1 >> j >> c2 >> v) || c1 != ',' || c2 != ',' || i >= n) {
      throw Error("malformed triplet line: " + line);
    }
    rows[i].emplace_back(static_cast<std::uint32_t>(j), v);
  }
  return from_rows(std::move(rows), std::move(names), std::move(groups));
}

FeatureMatrix assemble(std::span<const FeatureMatrix> blocks) {
  if (blocks.empty()) return FeatureMatrix{};
  FeatureMatrix m;
  m.rows_ = blocks.front().rows();
  for (const auto& b : blocks) {
    if (b.rows() != m.rows_) {
      throw ShapeError(fmt::format("cannot assemble blocks with {} and {} rows",
                                   m.rows_, b.rows()));
    }
    m.names_.insert(m.names_.end(), b.names_.begin(), b.names_.end());
    m.groups_.insert(m.groups_.end(), b.groups_.begin(), b.groups_.end());
  }
  for (std::size_t i = 0; i < m.rows_; ++i) {
    std::uint32_t offset = 0;
    for (const auto& b : blocks) {
      auto r = b.row(i);
      for (std::size_t k = 0; k < r.cols.size(); ++k) {
        m.col_index_.push_back(r.cols[k] + offset);
        m.values_.push_back(r.values[k]);
      }
      offset += static_cast<std::uint32_t>(b.cols());
    }
    m.row_ptr_.push_back(m.values_.size());
  }
  return m;
}

FeatureMatrix assemble(std::initializer_list<FeatureMatrix> blocks) {
  return assemble(std::span<const FeatureMatrix>(blocks.begin(), blocks.size()));
}

}  // namespace vulntriage
