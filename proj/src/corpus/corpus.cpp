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

#include "vulntriage/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include <fmt/format.h>

#include "json.hpp"
#include "vulntriage/csv.hpp"
#include "vulntriage/error.hpp"
#include "vulntriage/random.hpp"

namespace vulntriage::corpus {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

std::string header_key(std::string_view name) {
  std::string key;
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return key;
}

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

bool valid_date(int y, int m, int d) {
  static constexpr std::array<int, 12> kDays = {31, 28, 31, 30, 31, 30,
                                                31, 31, 30, 31, 30, 31};
  if (y < 1 || m < 1 || m > 12 || d < 1) return false;
  int limit = kDays[m - 1] + (m == 2 && is_leap(y) ? 1 : 0);
  return d <= limit;
}

std::optional<int> parse_int(std::string_view s) {
  int value = 0;
  if (s.empty()) return std::nullopt;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::optional<int> month_from_name(std::string_view name) {
  static constexpr std::array<std::string_view, 12> kMonths = {
      "january", "february", "march",     "april",   "may",      "june",
      "july",    "august",   "september", "october", "november", "december"};
  std::string lower;
  for (char c : name) {
    lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (!lower.empty() && lower.back() == '.') lower.pop_back();
  if (lower.size() < 3) return std::nullopt;
  for (std::size_t i = 0; i < kMonths.size(); ++i) {
    if (kMonths[i] == lower ||
        (lower.size() == 3 && kMonths[i].substr(0, 3) == lower) ||
        (lower == "sept" && i == 8)) {
      return static_cast<int>(i + 1);
    }
  }
  return std::nullopt;
}

std::size_t resolve(const std::vector<std::string>& header,
                    const std::vector<std::string>& candidates,
                    std::string_view field) {
  for (const auto& candidate : candidates) {
    const std::string key = header_key(candidate);
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header_key(header[i]) == key) return i;
    }
  }
  std::string names;
  for (const auto& c : candidates) names += (names.empty() ? "" : ", ") + c;
  throw SchemaError(fmt::format("no CSV column for field '{}' (looked for: {})",
                                field, names));
}

std::vector<DisclosureRecord> pick(std::span<const DisclosureRecord> records,
                                   std::span<const std::size_t> idx) {
  std::vector<DisclosureRecord> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(records[i]);
  return out;
}

std::vector<int> pick(std::span<const int> labels,
                      std::span<const std::size_t> idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(labels[i]);
  return out;
}

}  // namespace

std::string Date::iso() const {
  return fmt::format("{:04d}-{:02d}-{:02d}", year, month, day);
}

std::optional<Date> parse_date(std::string_view text) {
  text = trim(text);
  if (text.size() >= 10 && text[4] == '-' && text[7] == '-') {
    auto y = parse_int(text.substr(0, 4));
    auto m = parse_int(text.substr(5, 2));
    auto d = parse_int(text.substr(8, 2));
    bool tail_ok = text.size() == 10 || text[10] == 'T' || text[10] == ' ';
    if (y && m && d && tail_ok && valid_date(*y, *m, *d)) return Date{*y, *m, *d};
    return std::nullopt;
  }
  // "Month DD, YYYY"
  auto space = text.find(' ');
  auto comma = text.find(',');
  if (space == std::string_view::npos || comma == std::string_view::npos ||
      comma < space) {
    return std::nullopt;
  }
  auto m = month_from_name(text.substr(0, space));
  auto d = parse_int(trim(text.substr(space + 1, comma - space - 1)));
  auto y = parse_int(trim(text.substr(comma + 1)));
  if (m && d && y && valid_date(*y, *m, *d)) return Date{*y, *m, *d};
  return std::nullopt;
}

std::optional<double> parse_cvss(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  double value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  if (!std::isfinite(value) || value < 0.0 || value > 10.0) return std::nullopt;
  return value;
}

ColumnSchema ColumnSchema::defaults() {
  return ColumnSchema{
      .zdi_id = {"zdi_id", "ZDI ID", "ZDI-ID", "id"},
      .cve_id = {"cve_id", "CVE ID", "CVE", "CVEs"},
      .cvss = {"cvss", "CVSS v3.0", "CVSS v3", "CVSS Score", "CVSSv3 Score",
               "CVSS Base Score"},
      .published = {"published", "Published Date", "Publish Date", "Date"},
      .vendor = {"vendor", "Affected Vendor", "Affected Vendors", "Vendors"},
      .description = {"description", "Title", "Summary"},
  };
}

ColumnSchema ColumnSchema::with_overrides(
    const std::map<std::string, std::string>& overrides) {
  ColumnSchema schema = defaults();
  for (const auto& [field, column] : overrides) {
    std::vector<std::string>* slot = nullptr;
    if (field == "zdi_id") slot = &schema.zdi_id;
    else if (field == "cve_id") slot = &schema.cve_id;
    else if (field == "cvss") slot = &schema.cvss;
    else if (field == "published") slot = &schema.published;
    else if (field == "vendor") slot = &schema.vendor;
    else if (field == "description") slot = &schema.description;
    else throw ConfigError("unknown schema field '" + field + "'");
    *slot = {column};
  }
  return schema;
}

std::vector<DisclosureRecord> parse_csv(std::istream& in,
                                        const ColumnSchema& schema,
                                        ParseMode mode) {
  csv::Table table = csv::read_table(in);
  if (table.header.empty()) throw SchemaError("CSV input has no header row");

  const auto c_id = resolve(table.header, schema.zdi_id, "zdi_id");
  auto optional_column = [&](const std::vector<std::string>& candidates,
                             std::string_view field) -> std::optional<std::size_t> {
    try {
      return resolve(table.header, candidates, field);
    } catch (const SchemaError&) {
      if (mode == ParseMode::kTraining) throw;
      return std::nullopt;
    }
  };
  const auto c_cve = optional_column(schema.cve_id, "cve_id");
  const auto c_cvss = optional_column(schema.cvss, "cvss");
  const auto c_pub = optional_column(schema.published, "published");
  const auto c_vendor = resolve(table.header, schema.vendor, "vendor");
  const auto c_desc = resolve(table.header, schema.description, "description");

  std::vector<DisclosureRecord> records;
  records.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    DisclosureRecord rec;
    rec.zdi_id = std::string(trim(row[c_id]));
    if (rec.zdi_id.empty()) throw RowError(table.row_lines[r], "empty zdi_id");
    if (c_cve) {
      auto cve = trim(row[*c_cve]);
      if (!cve.empty()) rec.cve_id = std::string(cve);
    }
    if (c_cvss) rec.cvss = parse_cvss(row[*c_cvss]);
    if (c_pub) rec.published = parse_date(row[*c_pub]);
    rec.vendor = std::string(trim(row[c_vendor]));
    rec.description = std::string(trim(row[c_desc]));
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<DisclosureRecord> read_csv_file(const std::filesystem::path& path,
                                            const ColumnSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return parse_csv(in, schema);
}

std::vector<DisclosureRecord> clean(std::span<const DisclosureRecord> records) {
  std::vector<DisclosureRecord> out;
  std::unordered_set<std::string> seen;
  for (const auto& rec : records) {
    if (!rec.cvss || !std::isfinite(*rec.cvss)) continue;
    if (!seen.insert(rec.zdi_id).second) continue;
    out.push_back(rec);
  }
  return out;
}

std::vector<int> label(std::span<const DisclosureRecord> records,
                       double threshold) {
  std::vector<int> labels;
  labels.reserve(records.size());
  for (const auto& rec : records) {
    if (!rec.cvss) {
      throw PreconditionError("record " + rec.zdi_id + " has no CVSS score");
    }
    labels.push_back(*rec.cvss >= threshold ? 1 : 0);
  }
  return labels;
}

Split stratified_indices(std::span<const int> labels, double test_fraction,
                         std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test fraction must lie in (0, 1)");
  }
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw DomainError("labels must be 0 or 1");
    }
    by_class[labels[i]].push_back(i);
  }
  if (by_class[0].empty() || by_class[1].empty()) {
    throw FitError("stratified split needs both classes present");
  }
  const std::size_t n = labels.size();
  const auto test_size = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * test_fraction));

  // Largest-remainder allocation of the test quota across the two classes.
  std::array<std::size_t, 2> quota{};
  std::array<double, 2> remainder{};
  std::size_t assigned = 0;
  for (int c = 0; c < 2; ++c) {
    double exact = static_cast<double>(by_class[c].size()) *
                   static_cast<double>(test_size) / static_cast<double>(n);
    quota[c] = static_cast<std::size_t>(std::floor(exact));
    remainder[c] = exact - static_cast<double>(quota[c]);
    assigned += quota[c];
  }
  while (assigned < test_size) {
    int c = remainder[1] > remainder[0] ? 1 : 0;
    ++quota[c];
    remainder[c] = -1.0;
    ++assigned;
  }

  Rng rng(seed);
  Split split;
  for (int c = 0; c < 2; ++c) {
    auto members = by_class[c];
    std::shuffle(members.begin(), members.end(), rng);
    split.test.insert(split.test.end(), members.begin(),
                      members.begin() + static_cast<std::ptrdiff_t>(quota[c]));
    split.train.insert(split.train.end(),
                       members.begin() + static_cast<std::ptrdiff_t>(quota[c]),
                       members.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

LabeledDataset stratified_split(std::vector<DisclosureRecord> records,
                                std::vector<int> labels, double test_fraction,
                                std::uint64_t seed) {
  if (records.size() != labels.size()) {
    throw ShapeError("records and labels differ in length");
  }
  LabeledDataset ds;
  ds.split = stratified_indices(labels, test_fraction, seed);
  ds.records = std::move(records);
  ds.labels = std::move(labels);
  return ds;
}

std::vector<DisclosureRecord> LabeledDataset::train_records() const {
  return pick(records, split.train);
}
std::vector<DisclosureRecord> LabeledDataset::test_records() const {
  return pick(records, split.test);
}
std::vector<int> LabeledDataset::train_labels() const {
  return pick(labels, split.train);
}
std::vector<int> LabeledDataset::test_labels() const {
  return pick(labels, split.test);
}

void write_csv(std::ostream& out, std::span<const DisclosureRecord> records) {
  csv::write_row(out, {"zdi_id", "cve_id", "cvss", "published", "vendor",
                       "description"});
  for (const auto& r : records) {
    csv::write_row(out, {r.zdi_id, r.cve_id.value_or(""),
                         r.cvss ? fmt::format("{}", *r.cvss) : "",
                         r.published ? r.published->iso() : "", r.vendor,
                         r.description});
  }
}

void write_jsonl(std::ostream& out, std::span<const DisclosureRecord> records) {
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["zdi_id"] = r.zdi_id;
    j["cve_id"] = r.cve_id ? nlohmann::ordered_json(*r.cve_id) : nullptr;
    j["cvss"] = r.cvss ? nlohmann::ordered_json(*r.cvss) : nullptr;
    j["published"] =
        r.published ? nlohmann::ordered_json(r.published->iso()) : nullptr;
    j["vendor"] = r.vendor;
    j["description"] = r.description;
    out << j.dump() << '\n';
  }
}

}  // namespace vulntriage::corpus
