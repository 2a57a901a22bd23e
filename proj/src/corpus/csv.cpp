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

#include "vulntriage/csv.hpp"

#include "vulntriage/error.hpp"

namespace vulntriage::csv {

Reader::Reader(std::istream& in, char sep) : in_(in), sep_(sep) {}

std::optional<std::vector<std::string>> Reader::next() {
  while (true) {
    if (first_) {
      first_ = false;
      // Skip a UTF-8 byte order mark.
      if (in_.peek() == 0xEF) {
        char bom[3];
        in_.read(bom, 3);
        if (!(static_cast<unsigned char>(bom[1]) == 0xBB &&
              static_cast<unsigned char>(bom[2]) == 0xBF)) {
          throw RowError(line_, "invalid byte order mark");
        }
      }
    }
    if (in_.peek() == std::char_traits<char>::eof()) return std::nullopt;

    record_line_ = line_;
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;       // inside a quoted section
    bool was_quoted = false;   // current field started with a quote
    bool after_quote = false;  // a closing quote was just seen
    bool any = false;

    int ch;
    while ((ch = in_.get()) != std::char_traits<char>::eof()) {
      const char c = static_cast<char>(ch);
      any = true;
      if (quoted) {
        if (c == '"') {
          if (in_.peek() == '"') {
            in_.get();
            field.push_back('"');
          } else {
            quoted = false;
            after_quote = true;
          }
        } else {
          if (c == '\n') ++line_;
          field.push_back(c);
        }
        continue;
      }
      if (c == sep_) {
        fields.push_back(std::move(field));
        field.clear();
        was_quoted = after_quote = false;
      } else if (c == '\r') {
        if (in_.peek() != '\n') field.push_back(c);
      } else if (c == '\n') {
        ++line_;
        break;
      } else if (c == '"') {
        if (!field.empty() || was_quoted) {
          throw RowError(record_line_, "unexpected quote inside field");
        }
        quoted = was_quoted = true;
      } else {
        if (after_quote) {
          throw RowError(record_line_, "text after closing quote");
        }
        field.push_back(c);
      }
    }
    if (quoted) throw RowError(record_line_, "unterminated quoted field");
    if (!any) return std::nullopt;
    fields.push_back(std::move(field));
    if (fields.size() == 1 && fields[0].empty() && !was_quoted) continue;
    return fields;
  }
}

Table read_table(std::istream& in) {
  Reader reader(in);
  Table table;
  auto header = reader.next();
  if (!header) return table;
  table.header = std::move(*header);
  while (auto row = reader.next()) {
    if (row->size() != table.header.size()) {
      throw RowError(reader.record_line(),
                     "expected " + std::to_string(table.header.size()) +
                         " fields, found " + std::to_string(row->size()));
    }
    table.rows.push_back(std::move(*row));
    table.row_lines.push_back(reader.record_line());
  }
  return table;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

}  // namespace vulntriage::csv
