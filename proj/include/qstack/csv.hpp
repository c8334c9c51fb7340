/*
 * Copyright 2026 The qstack Authors.
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

#ifndef QSTACK_CSV_HPP_
#define QSTACK_CSV_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Minimal CSV reading and writing: header row, comma separator, optional
// double-quoted fields, '#' comment lines ignored on read.
namespace qstack::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // 1-based line number of each row in the source file.
  std::vector<std::size_t> line_numbers;

  // Index of a header column, or nullopt.
  std::optional<std::size_t> column(std::string_view name) const;
};

std::vector<std::string> split_line(std::string_view line);

// Throws std::runtime_error when the file cannot be opened or is empty.
Table read_file(const std::filesystem::path& path);

std::string escape(std::string_view field);
std::string join(std::span<const std::string> fields);

// Empty cells and "NA" encode missing values.
bool is_missing(std::string_view cell);

// Parses a finite number, rejecting trailing garbage.
std::optional<double> parse_double(std::string_view cell);
std::optional<long long> parse_integer(std::string_view cell);

// Shortest representation that parses back to the same double.
std::string format_double(double value);

}  // namespace qstack::csv

#endif  // QSTACK_CSV_HPP_
