//
// Copyright 2026 The GSSD Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// CSV ingestion of sample matrices.

#pragma once

#include <charconv>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "gssd/slicing.hpp"

namespace gssd {

/// Malformed matrix CSV. row/column are 1-based positions in the file.
class CsvError : public std::runtime_error {
 public:
  CsvError(const std::string& what, std::size_t row, std::size_t column)
      : std::runtime_error(what), row_(row), column_(column) {}
  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

inline bool parse_double(std::string_view cell, double& out) {
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size();
}

}  // namespace detail

/**
 * Parses a comma-separated numeric matrix. The first line may be a header
 * (it is skipped if any of its cells is non-numeric); blank lines are
 * ignored. Every other line must have the same number of numeric cells.
 */
inline SampleSet parse_matrix_csv(std::string_view text) {
  std::vector<double> data;
  std::size_t width = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  bool first_content_line = true;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
    if (detail::trim(line).empty()) {
      if (end == text.size()) break;
      continue;
    }
    const auto cells = detail::split_commas(line);
    std::vector<double> values(cells.size());
    std::size_t bad = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (!detail::parse_double(cells[c], values[c])) {
        bad = c + 1;
        break;
      }
    }
    if (bad != 0) {
      if (first_content_line) {  // header
        first_content_line = false;
        continue;
      }
      throw CsvError("non-numeric cell '" + std::string(cells[bad - 1]) +
                         "' at row " + std::to_string(line_no) + ", column " +
                         std::to_string(bad),
                     line_no, bad);
    }
    first_content_line = false;
    if (width == 0) {
      width = values.size();
    } else if (values.size() != width) {
      throw CsvError("ragged row " + std::to_string(line_no) + ": expected " +
                         std::to_string(width) + " columns, found " +
                         std::to_string(values.size()),
                     line_no, std::min(values.size(), width) + 1);
    }
    data.insert(data.end(), values.begin(), values.end());
    ++rows;
    if (end == text.size()) break;
  }
  if (rows == 0) throw CsvError("no numeric rows", line_no, 0);
  return SampleSet(rows, width, std::move(data));
}

inline SampleSet read_matrix_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_matrix_csv(buf.str());
}

}  // namespace gssd
