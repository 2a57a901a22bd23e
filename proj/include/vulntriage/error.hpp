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

#ifndef VULNTRIAGE_ERROR_HPP_
#define VULNTRIAGE_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vulntriage {

// Base of every error thrown by the library. The CLI maps any of these to a
// nonzero exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A column named in the schema mapping is absent from the CSV header.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// A CSV row could not be parsed. Carries the 1-based physical line number.
class RowError : public Error {
 public:
  RowError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Operand dimensions disagree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Model fitting cannot proceed (empty corpus, single class, ...).
class FitError : public Error {
 public:
  using Error::Error;
};

// Requested rank exceeds what the data supports.
class RankError : public Error {
 public:
  using Error::Error;
};

// Input violates a documented domain (negative entry for chi-square, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A hyperparameter or option is out of range.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Precondition of an operation does not hold (e.g. labelling a record
// without a CVSS score).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Neural training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Unknown layer / key / artifact name.
class LookupError : public Error {
 public:
  using Error::Error;
};

}  // namespace vulntriage

#endif  // VULNTRIAGE_ERROR_HPP_
