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

#ifndef VULNTRIAGE_FEATURES_HPP_
#define VULNTRIAGE_FEATURES_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "vulntriage/corpus.hpp"
#include "vulntriage/feature_matrix.hpp"

namespace vulntriage::features {

using corpus::DisclosureRecord;

// Lowercased maximal runs of ASCII letters/digits (bytes >= 0x80 count as
// letters so UTF-8 words stay whole); runs shorter than two are dropped.
std::vector<std::string> tokenize(std::string_view text);

// True iff `id` matches CVE-\d{4}-\d{4,} (case-insensitive prefix).
bool is_cve_id(std::string_view id);
int cve_flag(const DisclosureRecord& record);

class KeywordLexicon {
 public:
  // Phrases are normalized through tokenize(); throws ConfigError for an
  // empty list, a phrase outside 1-4 tokens, or duplicates.
  explicit KeywordLexicon(std::vector<std::string> phrases);

  // buffer overflow, remote code execution, code execution, remote code,
  // privilege escalation, denial of service, information disclosure,
  // info disclosure, xss, rce.
  static KeywordLexicon default_lexicon();
  // One phrase per line; blank lines and '#' comments ignored.
  static KeywordLexicon load(const std::filesystem::path& path);

  const std::vector<std::string>& phrases() const { return phrases_; }
  const std::vector<std::vector<std::string>>& phrase_tokens() const {
    return tokens_;
  }
  std::size_t size() const { return phrases_.size(); }

 private:
  std::vector<std::string> phrases_;
  std::vector<std::vector<std::string>> tokens_;
};

// flag[i] = 1 iff phrase i occurs as a contiguous token run.
std::vector<int> keyword_flags(std::string_view description,
                               const KeywordLexicon& lexicon);

// (phrase, number of records flagged), descending by count, ties alphabetical.
std::vector<std::pair<std::string, std::size_t>> keyword_frequencies(
    std::span<const DisclosureRecord> records, const KeywordLexicon& lexicon,
    std::size_t top_k = 10);

// has_cve followed by one column per lexicon phrase ("kw:<phrase>").
FeatureMatrix indicator_block(std::span<const DisclosureRecord> records,
                              const KeywordLexicon& lexicon);

struct TfidfConfig {
  int ngram_lo = 1;
  int ngram_hi = 2;
  std::size_t max_features = 5000;
};

// Smoothed TF-IDF: entry = count(t) * (ln((1 + N) / (1 + df(t))) + 1), rows
// L2-normalized. Vocabulary keeps the max_features most frequent n-grams
// (ties alphabetical) and is indexed alphabetically.
class TfidfModel {
 public:
  static TfidfModel fit(std::span<const std::string> documents,
                        const TfidfConfig& config = {});

  SparseRow transform(std::string_view document) const;
  FeatureMatrix transform(std::span<const std::string> documents) const;

  const std::vector<std::string>& vocabulary() const { return terms_; }
  const std::vector<double>& idf() const { return idf_; }
  const TfidfConfig& config() const { return config_; }
  // -1 when absent.
  long index_of(std::string_view term) const;

  nlohmann::json to_json() const;
  static TfidfModel from_json(const nlohmann::json& j);

 private:
  TfidfConfig config_;
  std::vector<std::string> terms_;
  std::vector<double> idf_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

// N-grams of a token list for n in [lo, hi], space-joined.
std::vector<std::string> ngrams(const std::vector<std::string>& tokens, int lo,
                                int hi);

class VendorEncoder {
 public:
  // Categories sorted lexicographically.
  static VendorEncoder fit(std::span<const DisclosureRecord> records);
  explicit VendorEncoder(std::vector<std::string> categories);
  VendorEncoder() = default;

  // One-hot; all zeros for a vendor unseen at fit time.
  std::vector<double> encode(const DisclosureRecord& record) const;
  FeatureMatrix encode(std::span<const DisclosureRecord> records) const;

  const std::vector<std::string>& categories() const { return categories_; }

  nlohmann::json to_json() const;
  static VendorEncoder from_json(const nlohmann::json& j);

 private:
  std::vector<std::string> categories_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

std::vector<std::string> descriptions(std::span<const DisclosureRecord> records);

}  // namespace vulntriage::features

#endif  // VULNTRIAGE_FEATURES_HPP_
