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


#ifndef VULNTRIAGE_TESTS_SYNTHETIC_HPP_
#define VULNTRIAGE_TESTS_SYNTHETIC_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "vulntriage/corpus.hpp"

namespace vulntriage::testing {

struct SyntheticOptions {
  std::size_t rows = 415;
  std::uint64_t seed = 7;
  double missing_cvss = 0.0;  // fraction of rows with an empty score
  double label_noise = 0.04;  // fraction of scores drawn from the other band
};

// Advisory-style CSV ("ZDI ID", "CVE ID", "CVSS v3.0", "Published",
// "Affected Vendor", "Title") whose severity follows the weakness class in
// the title, as in real disclosure feeds.
std::string synthetic_csv(const SyntheticOptions& options = {});
std::vector<corpus::DisclosureRecord> synthetic_records(const SyntheticOptions& options = {});

}  // namespace vulntriage::testing

#endif  // VULNTRIAGE_TESTS_SYNTHETIC_HPP_
