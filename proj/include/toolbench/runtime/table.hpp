#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "toolbench/util/json.hpp"

namespace toolbench::runtime {

/// NULL is an absent value; an empty string is a present one.
using Cell = std::optional<std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  /// Exact name match first, then a unique ASCII case-insensitive match.
  std::optional<std::size_t> find_column(std::string_view name) const;
  /// As find_column but throws Error(unknown_column).
  std::size_t column_index(std::string_view name) const;

  /// A column is numeric iff every non-NULL cell parses as a number.
  bool is_numeric_column(std::size_t index) const;

  /// Cell converted to JSON: null, number for numeric columns, else string.
  Json cell_json(std::size_t row, std::size_t column) const;
  /// All rows as JSON arrays.
  Json rows_json() const;

  bool operator==(const Table&) const = default;
};

// CSV: UTF-8, RFC 4180 quoting, header row, unquoted empty field = NULL,
// quoted empty field = empty string. Fields are quoted only when needed.
std::string to_csv(const Table& table);
Table parse_csv(std::string_view text);

Table read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const Table& table);

/// File-backed table produced by a tool.
struct TableHandle {
  std::filesystem::path path;
  std::vector<std::string> schema;
  std::size_t row_count = 0;
};

}  // namespace toolbench::runtime
