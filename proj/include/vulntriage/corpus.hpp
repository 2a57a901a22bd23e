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

#ifndef VULNTRIAGE_CORPUS_HPP_
#define VULNTRIAGE_CORPUS_HPP_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vulntriage::corpus {

struct Date {
  int year = 0;
  int month = 0;
  int day = 0;

  auto operator<=>(const Date&) const = default;
  std::string iso() const;
};

// Accepts ISO-8601 ("2024-01-15", optionally followed by a time part) and
// "January 15, 2024" / "Jan 15, 2024". Returns nullopt otherwise.
std::optional<Date> parse_date(std::string_view text);

// Parses a CVSS base score. Anything that is not a finite number in [0, 10]
// (e.g. "N/A", "") is missing.
std::optional<double> parse_cvss(std::string_view text);

// One ZDI advisory row.
struct DisclosureRecord {
  std::string zdi_id;
  std::optional<std::string> cve_id;
  std::optional<double> cvss;
  std::optional<Date> published;
  std::string vendor;
  std::string description;

  bool operator==(const DisclosureRecord&) const = default;
};

// Maps each record field to the CSV header names that may carry it. Header
// matching is case-insensitive and ignores non-alphanumeric characters, so
// "CVSS v3.0" matches "cvss_v3_0".
struct ColumnSchema {
  std::vector<std::string> zdi_id;
  std::vector<std::string> cve_id;
  std::vector<std::string> cvss;
  std::vector<std::string> published;
  std::vector<std::string> vendor;
  std::vector<std::string> description;

  // Canonical names plus the aliases used by the public ZDI exports.
  static ColumnSchema defaults();

  // Defaults with the fields named in `overrides` pinned to exactly one
  // header each. Keys: zdi_id, cve_id, cvss, published, vendor, description.
  static ColumnSchema with_overrides(
      const std::map<std::string, std::string>& overrides);
};

// kScoring needs only the id, vendor and description columns; absent ones
// read as missing values.
enum class ParseMode { kTraining, kScoring };

// Throws SchemaError when a required field has no matching header and
// RowError for malformed rows.
std::vector<DisclosureRecord> parse_csv(std::istream& in,
                                        const ColumnSchema& schema,
                                        ParseMode mode = ParseMode::kTraining);
std::vector<DisclosureRecord> read_csv_file(const std::filesystem::path& path,
                                            const ColumnSchema& schema);

// Drops records with missing CVSS and later duplicates of a zdi_id.
// Order-preserving and idempotent.
std::vector<DisclosureRecord> clean(std::span<const DisclosureRecord> records);

inline constexpr double kHighSeverityThreshold = 7.0;

// 1 iff cvss >= threshold. Throws PreconditionError on missing cvss.
std::vector<int> label(std::span<const DisclosureRecord> records,
                       double threshold = kHighSeverityThreshold);

struct Split {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

// Stratified hold-out split. Test size is round(n * test_fraction); each
// class contributes its proportional share rounded to nearest, and the
// members are drawn by a seeded shuffle.
Split stratified_indices(std::span<const int> labels, double test_fraction,
                         std::uint64_t seed);

struct LabeledDataset {
  std::vector<DisclosureRecord> records;
  std::vector<int> labels;
  Split split;

  std::vector<DisclosureRecord> train_records() const;
  std::vector<DisclosureRecord> test_records() const;
  std::vector<int> train_labels() const;
  std::vector<int> test_labels() const;
};

inline constexpr std::uint64_t kDefaultSeed = 42;
inline constexpr double kDefaultTestFraction = 0.2;

LabeledDataset stratified_split(std::vector<DisclosureRecord> records,
                                std::vector<int> labels,
                                double test_fraction = kDefaultTestFraction,
                                std::uint64_t seed = kDefaultSeed);

// Output with canonical headers zdi_id,cve_id,cvss,published,vendor,description.
void write_csv(std::ostream& out, std::span<const DisclosureRecord> records);
// One JSON object per line.
void write_jsonl(std::ostream& out, std::span<const DisclosureRecord> records);

}  // namespace vulntriage::corpus

#endif  // VULNTRIAGE_CORPUS_HPP_
