// Copyright 2026 The irscreen Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace irscreen::csv {

/// Plain comma-separated table: header row, no quoting, empty cell = missing.
struct Table {
  std::string path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row

  std::optional<std::size_t> column(std::string_view name) const;
  std::size_t require_column(std::string_view name) const;
  std::string where(std::size_t row) const;  // "path:line"
};

Table read(const std::filesystem::path& path);

/// Numeric cell: nullopt when empty, Parse error when not a finite number.
std::optional<double> number(const Table& t, std::size_t row, std::size_t col);

/// Shortest round-trip decimal representation.
std::string format_number(double v);

void write_row(std::ostream& os, const std::vector<std::string>& cells);

}  // namespace irscreen::csv
