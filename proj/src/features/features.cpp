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

#include "vulntriage/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <unordered_map>

#include "vulntriage/error.hpp"

namespace vulntriage::features {

namespace {

bool is_word_byte(unsigned char c) {
  return std::isalnum(c) || c >= 0x80;
}

std::string join(const std::vector<std::string>& tokens, std::size_t begin,
                 std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

bool contains_run(const std::vector<std::string>& haystack,
                  const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > haystack.size()) return false;
  return std::search(haystack.begin(), haystack.end(), needle.begin(),
                     needle.end()) != haystack.end();
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (current.size() >= 2) tokens.push_back(current);
    current.clear();
  };
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (is_word_byte(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

bool is_cve_id(std::string_view id) {
  if (id.size() < 13) return false;
  for (std::size_t i = 0; i < 3; ++i) {
    if (std::toupper(static_cast<unsigned char>(id[i])) != "CVE"[i]) return false;
  }
  if (id[3] != '-' || id[8] != '-') return false;
  for (std::size_t i = 4; i < 8; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(id[i]))) return false;
  }
  for (std::size_t i = 9; i < id.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(id[i]))) return false;
  }
  return id.size() - 9 >= 4;
}

int cve_flag(const DisclosureRecord& record) {
  return record.cve_id && is_cve_id(*record.cve_id) ? 1 : 0;
}

KeywordLexicon::KeywordLexicon(std::vector<std::string> phrases) {
  if (phrases.empty()) throw ConfigError("keyword lexicon is empty");
  std::set<std::string> seen;
  for (const auto& raw : phrases) {
    auto tokens = tokenize(raw);
    if (tokens.empty() || tokens.size() > 4) {
      throw ConfigError("lexicon phrase must have 1-4 tokens: '" + raw + "'");
    }
    auto phrase = join(tokens, 0, tokens.size());
    if (!seen.insert(phrase).second) {
      throw ConfigError("duplicate lexicon phrase '" + phrase + "'");
    }
    phrases_.push_back(std::move(phrase));
    tokens_.push_back(std::move(tokens));
  }
}

KeywordLexicon KeywordLexicon::default_lexicon() {
  return KeywordLexicon({"buffer overflow", "remote code execution",
                         "code execution", "remote code",
                         "privilege escalation", "denial of service",
                         "information disclosure", "info disclosure", "xss",
                         "rce"});
}

KeywordLexicon KeywordLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open lexicon " + path.string());
  std::vector<std::string> phrases;
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    phrases.push_back(line);
  }
  return KeywordLexicon(std::move(phrases));
}

std::vector<int> keyword_flags(std::string_view description,
                               const KeywordLexicon& lexicon) {
  const auto tokens = tokenize(description);
  std::vector<int> flags;
  flags.reserve(lexicon.size());
  for (const auto& phrase : lexicon.phrase_tokens()) {
    flags.push_back(contains_run(tokens, phrase) ? 1 : 0);
  }
  return flags;
}

std::vector<std::pair<std::string, std::size_t>> keyword_frequencies(
    std::span<const DisclosureRecord> records, const KeywordLexicon& lexicon,
    std::size_t top_k) {
  std::vector<std::size_t> counts(lexicon.size(), 0);
  for (const auto& rec : records) {
    auto flags = keyword_flags(rec.description, lexicon);
    for (std::size_t i = 0; i < flags.size(); ++i) counts[i] += flags[i];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    ranked.emplace_back(lexicon.phrases()[i], counts[i]);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > top_k) ranked.resize(top_k);
  return ranked;
}

FeatureMatrix indicator_block(std::span<const DisclosureRecord> records,
                              const KeywordLexicon& lexicon) {
  std::vector<std::string> names{"has_cve"};
  for (const auto& p : lexicon.phrases()) names.push_back("kw:" + p);
  std::vector<SparseRow> rows(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (cve_flag(records[i])) rows[i].emplace_back(0, 1.0);
    auto flags = keyword_flags(records[i].description, lexicon);
    for (std::size_t k = 0; k < flags.size(); ++k) {
      if (flags[k]) rows[i].emplace_back(static_cast<std::uint32_t>(k + 1), 1.0);
    }
  }
  std::vector<ColumnGroup> groups(names.size(), ColumnGroup::kIndicator);
  return FeatureMatrix::from_rows(std::move(rows), std::move(names),
                                  std::move(groups));
}

std::vector<std::string> ngrams(const std::vector<std::string>& tokens, int lo,
                                int hi) {
  std::vector<std::string> out;
  for (int n = lo; n <= hi; ++n) {
    const auto len = static_cast<std::size_t>(n);
    if (len == 0 || len > tokens.size()) continue;
    for (std::size_t i = 0; i + len <= tokens.size(); ++i) {
      out.push_back(join(tokens, i, i + len));
    }
  }
  return out;
}

TfidfModel TfidfModel::fit(std::span<const std::string> documents,
                           const TfidfConfig& config) {
  if (documents.empty()) throw FitError("TF-IDF needs a non-empty corpus");
  if (config.ngram_lo < 1 || config.ngram_hi < config.ngram_lo) {
    throw ConfigError("invalid n-gram range");
  }
  if (config.max_features == 0) throw ConfigError("max_features must be >= 1");

  std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> stats;
  for (const auto& doc : documents) {
    auto grams = ngrams(tokenize(doc), config.ngram_lo, config.ngram_hi);
    std::set<std::string> distinct;
    for (auto& g : grams) {
      ++stats[g].first;  // corpus frequency
      distinct.insert(std::move(g));
    }
    for (const auto& g : distinct) ++stats[g].second;  // document frequency
  }
  if (stats.empty()) throw FitError("TF-IDF corpus has no tokens");

  std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> all(
      stats.begin(), stats.end());
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    if (a.second.first != b.second.first) return a.second.first > b.second.first;
    return a.first < b.first;
  });
  if (all.size() > config.max_features) all.resize(config.max_features);
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  TfidfModel model;
  model.config_ = config;
  const double n = static_cast<double>(documents.size());
  for (std::size_t j = 0; j < all.size(); ++j) {
    const double df = static_cast<double>(all[j].second.second);
    model.terms_.push_back(all[j].first);
    model.idf_.push_back(std::log((1.0 + n) / (1.0 + df)) + 1.0);
    model.index_.emplace(all[j].first, j);
  }
  return model;
}

long TfidfModel::index_of(std::string_view term) const {
  auto it = index_.find(term);
  return it == index_.end() ? -1 : static_cast<long>(it->second);
}

SparseRow TfidfModel::transform(std::string_view document) const {
  std::map<std::uint32_t, double> counts;
  for (const auto& g :
       ngrams(tokenize(document), config_.ngram_lo, config_.ngram_hi)) {
    auto it = index_.find(g);
    if (it != index_.end()) counts[static_cast<std::uint32_t>(it->second)] += 1.0;
  }
  SparseRow row;
  double norm = 0.0;
  for (const auto& [col, tf] : counts) {
    const double v = tf * idf_[col];
    row.emplace_back(col, v);
    norm += v * v;
  }
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (auto& e : row) e.second /= norm;
  }
  return row;
}

FeatureMatrix TfidfModel::transform(std::span<const std::string> documents) const {
  std::vector<SparseRow> rows;
  rows.reserve(documents.size());
  for (const auto& d : documents) rows.push_back(transform(d));
  std::vector<ColumnGroup> groups(terms_.size(), ColumnGroup::kText);
  return FeatureMatrix::from_rows(std::move(rows), terms_, std::move(groups));
}

nlohmann::json TfidfModel::to_json() const {
  return {{"ngram_range", {config_.ngram_lo, config_.ngram_hi}},
          {"max_features", config_.max_features},
          {"vocabulary", terms_},
          {"idf", idf_}};
}

TfidfModel TfidfModel::from_json(const nlohmann::json& j) {
  TfidfModel model;
  model.config_.ngram_lo = j.at("ngram_range").at(0).get<int>();
  model.config_.ngram_hi = j.at("ngram_range").at(1).get<int>();
  model.config_.max_features = j.at("max_features").get<std::size_t>();
  model.terms_ = j.at("vocabulary").get<std::vector<std::string>>();
  model.idf_ = j.at("idf").get<std::vector<double>>();
  if (model.terms_.size() != model.idf_.size()) {
    throw ShapeError("TF-IDF vocabulary and idf differ in length");
  }
  for (std::size_t k = 0; k < model.terms_.size(); ++k) {
    model.index_.emplace(model.terms_[k], k);
  }
  return model;
}

VendorEncoder::VendorEncoder(std::vector<std::string> categories)
    : categories_(std::move(categories)) {
  for (std::size_t k = 0; k < categories_.size(); ++k) {
    if (!index_.emplace(categories_[k], k).second) {
      throw ConfigError("duplicate vendor category '" + categories_[k] + "'");
    }
  }
}

VendorEncoder VendorEncoder::fit(std::span<const DisclosureRecord> records) {
  std::set<std::string> seen;
  for (const auto& r : records) seen.insert(r.vendor);
  return VendorEncoder(std::vector<std::string>(seen.begin(), seen.end()));
}

std::vector<double> VendorEncoder::encode(const DisclosureRecord& record) const {
  std::vector<double> v(categories_.size(), 0.0);
  auto it = index_.find(record.vendor);
  if (it != index_.end()) v[it->second] = 1.0;
  return v;
}

FeatureMatrix VendorEncoder::encode(
    std::span<const DisclosureRecord> records) const {
  std::vector<SparseRow> rows(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto it = index_.find(records[i].vendor);
    if (it != index_.end()) {
      rows[i].emplace_back(static_cast<std::uint32_t>(it->second), 1.0);
    }
  }
  std::vector<ColumnGroup> groups(categories_.size(), ColumnGroup::kVendor);
  return FeatureMatrix::from_rows(std::move(rows), categories_,
                                  std::move(groups));
}

nlohmann::json VendorEncoder::to_json() const {
  return {{"categories", categories_}};
}

VendorEncoder VendorEncoder::from_json(const nlohmann::json& j) {
  return VendorEncoder(j.at("categories").get<std::vector<std::string>>());
}

std::vector<std::string> descriptions(std::span<const DisclosureRecord> records) {
  std::vector<std::string> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.description);
  return out;
}

}  // namespace vulntriage::features
