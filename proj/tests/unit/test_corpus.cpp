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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "synthetic.hpp"
#include "vulntriage/corpus.hpp"
#include "vulntriage/csv.hpp"
#include "vulntriage/error.hpp"

namespace vulntriage::corpus {
namespace {

std::vector<DisclosureRecord> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in, ColumnSchema::defaults());
}

DisclosureRecord rec(std::string id, std::optional<double> cvss) {
  DisclosureRecord r;
  r.zdi_id = std::move(id);
  r.cvss = cvss;
  r.vendor = "v";
  r.description = "d";
  return r;
}

TEST(Csv, QuotedFieldsAndLineBreaks) {
  std::istringstream in("\xEF\xBB\xBF" "a,b\r\n\"x, \"\"y\"\"\",\"multi\nline\"\n\n1,2\n");
  const auto t = csv::read_table(in);
  EXPECT_EQ(t.header, (std::vector<std::string>{"a", "b"}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][0], "x, \"y\"");
  EXPECT_EQ(t.rows[0][1], "multi\nline");
  EXPECT_EQ(t.row_lines[1], 5u);
}

TEST(Csv, EscapeRoundTrips) {
  std::ostringstream out;
  csv::write_row(out, {"plain", "with,comma", "with \"quote\"", "new\nline"});
  std::istringstream in(out.str());
  csv::Reader reader(in);
  EXPECT_EQ(*reader.next(),
            (std::vector<std::string>{"plain", "with,comma", "with \"quote\"", "new\nline"}));
}

TEST(Csv, MalformedRowsCarryLineNumbers) {
  std::istringstream wide("a,b\n1,2\n1,2,3\n");
  try {
    csv::read_table(wide);
    FAIL();
  } catch (const RowError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  std::istringstream open_quote("a\n\"never closed\n");
  EXPECT_THROW(csv::read_table(open_quote), RowError);
}

TEST(ParseDate, IsoAndLongForms) {
  EXPECT_EQ(parse_date("2024-01-09"), (Date{2024, 1, 9}));
  EXPECT_EQ(parse_date("2024-03-05T10:00:00Z"), (Date{2024, 3, 5}));
  EXPECT_EQ(parse_date("January 9, 2024"), (Date{2024, 1, 9}));
  EXPECT_EQ(parse_date("Feb 29, 2024"), (Date{2024, 2, 29}));
  EXPECT_FALSE(parse_date("Feb 30, 2024"));
  EXPECT_FALSE(parse_date("soon"));
  EXPECT_EQ(parse_date("2024-04-30")->iso(), "2024-04-30");
}

TEST(ParseCvss, MissingNeverZero) {
  EXPECT_EQ(parse_cvss("7.8"), 7.8);
  EXPECT_EQ(parse_cvss(" 10.0 "), 10.0);
  EXPECT_FALSE(parse_cvss("N/A"));
  EXPECT_FALSE(parse_cvss(""));
  EXPECT_FALSE(parse_cvss("11"));
  EXPECT_FALSE(parse_cvss("nan"));
}

TEST(ParseCsv, HeaderAliasesAndMissingValues) {
  const auto rs = parse(
      "ZDI ID,CVE ID,CVSS v3.0,Published,Affected Vendor,Title\n"
      "ZDI-24-001,CVE-2024-1,N/A,\"January 9, 2024\",Adobe,Acrobat UAF\n"
      "ZDI-24-002,,7.8,garbage,Apple,Safari bug\n");
  ASSERT_EQ(rs.size(), 2u);
  EXPECT_FALSE(rs[0].cvss);
  EXPECT_EQ(rs[0].cve_id, "CVE-2024-1");
  EXPECT_EQ(rs[0].published, (Date{2024, 1, 9}));
  EXPECT_FALSE(rs[1].cve_id);
  EXPECT_FALSE(rs[1].published);
  EXPECT_EQ(rs[1].vendor, "Apple");
}

TEST(ParseCsv, HeaderOnlyIsEmpty) {
  EXPECT_TRUE(parse("zdi_id,cve_id,cvss,published,vendor,description\n").empty());
}

TEST(ParseCsv, SchemaAndRowErrors) {
  EXPECT_THROW(parse("zdi_id,cvss\nZDI-1,7\n"), SchemaError);
  EXPECT_THROW(parse("zdi_id,cve_id,cvss,published,vendor,description\n,,7,,v,d\n"), RowError);
  std::istringstream in("id_col,cve,score,day,maker,text\nZ1,,9.1,,M,t\n");
  const auto rs = parse_csv(in, ColumnSchema::with_overrides({{"cvss", "score"},
                                                              {"vendor", "maker"},
                                                              {"description", "text"},
                                                              {"zdi_id", "id_col"},
                                                              {"published", "day"}}));
  EXPECT_EQ(rs.at(0).cvss, 9.1);
  EXPECT_THROW(ColumnSchema::with_overrides({{"severity", "x"}}), ConfigError);
}

TEST(ParseCsv, ScoringModeNeedsOnlyModelInputs) {
  std::istringstream in("zdi_id,vendor,description\nZ1,Acme,heap overflow\n");
  const auto rs = parse_csv(in, ColumnSchema::defaults(), ParseMode::kScoring);
  ASSERT_EQ(rs.size(), 1u);
  EXPECT_FALSE(rs[0].cvss);
  EXPECT_FALSE(rs[0].cve_id);
  EXPECT_EQ(rs[0].vendor, "Acme");
  EXPECT_THROW(parse("zdi_id,vendor,description\nZ1,Acme,x\n"), SchemaError);
  std::istringstream no_text("zdi_id,vendor\nZ1,Acme\n");
  EXPECT_THROW(parse_csv(no_text, ColumnSchema::defaults(), ParseMode::kScoring), SchemaError);
}

TEST(Clean, DropsMissingAndLaterDuplicates) {
  const std::vector<DisclosureRecord> rs{rec("a", 7.0), rec("b", std::nullopt), rec("c", 5.0)};
  EXPECT_EQ(clean(rs).size(), 2u);
  auto dup = rs;
  dup.push_back(rec("a", 1.0));
  const auto c = clean(dup);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].cvss, 7.0);
  EXPECT_EQ(clean(c), c);
}

TEST(Label, InclusiveThreshold) {
  const std::vector<DisclosureRecord> rs{rec("a", 7.0), rec("b", 6.9), rec("c", 10.0)};
  EXPECT_EQ(label(rs), (std::vector<int>{1, 0, 1}));
  EXPECT_THROW(label(std::vector<DisclosureRecord>{rec("x", std::nullopt)}), PreconditionError);
}

TEST(StratifiedSplit, SizesAndSymmetry) {
  std::vector<int> y(415);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = i % 3 != 0;
  EXPECT_EQ(stratified_indices(y, 0.2, 42).test.size(), 83u);

  const std::vector<int> ten{1, 1, 1, 1, 1, 0, 0, 0, 0, 0};
  const auto s = stratified_indices(ten, 0.2, 1);
  ASSERT_EQ(s.test.size(), 2u);
  EXPECT_NE(ten[s.test[0]], ten[s.test[1]]);
}

TEST(StratifiedSplit, Errors) {
  EXPECT_THROW(stratified_indices(std::vector<int>{1, 1, 1}, 0.2, 0), FitError);
  EXPECT_THROW(stratified_indices(std::vector<int>{1, 0}, 1.0, 0), ConfigError);
  EXPECT_THROW(stratified_indices(std::vector<int>{1, 0}, 0.0, 0), ConfigError);
}

TEST(StratifiedSplit, PartitionDeterminismAndBalanceProperty) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 5 + rng() % 200;
    const double pos_rate = 0.1 + 0.8 * std::uniform_real_distribution<double>(0, 1)(rng);
    std::vector<int> y(n);
    for (auto& v : y) v = std::uniform_real_distribution<double>(0, 1)(rng) < pos_rate;
    y[0] = 0;
    y[1] = 1;
    const double fraction = 0.1 + 0.3 * std::uniform_real_distribution<double>(0, 1)(rng);
    const auto seed = rng();
    const auto s = stratified_indices(y, fraction, seed);
    if (s.test.empty() || s.train.empty()) continue;

    std::vector<std::size_t> all(s.train);
    all.insert(all.end(), s.test.begin(), s.test.end());
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expected(n);
    std::iota(expected.begin(), expected.end(), 0);
    ASSERT_EQ(all, expected);
    ASSERT_EQ(s.test.size(), static_cast<std::size_t>(std::llround(static_cast<double>(n) * fraction)));

    auto rate = [&](const std::vector<std::size_t>& idx) {
      double p = 0;
      for (auto i : idx) p += y[i];
      return p / static_cast<double>(idx.size());
    };
    ASSERT_LE(std::abs(rate(s.train) - rate(s.test)), 1.0 / static_cast<double>(s.test.size()) + 1e-12)
        << "n=" << n << " fraction=" << fraction;
    const auto again = stratified_indices(y, fraction, seed);
    ASSERT_EQ(again.test, s.test);
  }
}

TEST(LabeledDataset, AccessorsFollowSplit) {
  auto rs = testing::synthetic_records({.rows = 50});
  auto y = label(rs);
  const auto ds = stratified_split(rs, y);
  EXPECT_EQ(ds.test_records().size(), 10u);
  EXPECT_EQ(ds.train_labels().size(), 40u);
  for (std::size_t k = 0; k < ds.split.test.size(); ++k) {
    EXPECT_EQ(ds.test_records()[k], rs[ds.split.test[k]]);
    EXPECT_EQ(ds.test_labels()[k], (*rs[ds.split.test[k]].cvss >= 7.0));
  }
}

TEST(Writers, CsvRoundTripAndJsonLines) {
  const auto rs = clean(testing::synthetic_records({.rows = 12, .missing_cvss = 0.2}));
  std::ostringstream csv_out, jsonl;
  write_csv(csv_out, rs);
  EXPECT_EQ(parse(csv_out.str()), rs);
  write_jsonl(jsonl, rs);
  const std::string lines = jsonl.str();
  EXPECT_EQ(static_cast<std::size_t>(std::count(lines.begin(), lines.end(), '\n')), rs.size());
}

}  // namespace
}  // namespace vulntriage::corpus
