#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "toolbench/runtime/database.hpp"
#include "toolbench/runtime/table.hpp"
#include "toolbench/sql/ast.hpp"
#include "toolbench/util/json.hpp"

// In-memory implementations of the data tools. The executor wraps these with
// file-backed payloads and label resolution.
namespace toolbench::runtime::tools {

/// The names of the seven pool tools, in a fixed order.
inline constexpr std::string_view kSlotToolNames[] = {
    "aggregate_data", "filter_data", "group_data_by", "retrieve_data",
    "select_unique_values", "sort_data", "transform_data"};

inline constexpr std::string_view kInitializeTool = "initialize_active_data";
inline constexpr std::string_view kStartingLabel = "starting_table_var";

/// condition_sequence: [[ "T1.col", "T2.col", "INNER" ], ...]
/// alias_to_table_dict: {alias: {"original_table_name", "modified_table_name"}}
/// Output columns are renamed to `{table}_{column}`.
Table initialize_active_data(const Json& condition_sequence, const Json& alias_to_table_dict,
                             const Database& db);

Table filter_data(const Table& data, std::string_view key_name, const Json& value,
                  sql::ConditionKind condition);

Table sort_data(const Table& data, std::string_view key_name, bool ascending);

/// Output columns: [key_name, aggregate_column_name(aggregation, target_key)].
Table group_data_by(const Table& data, std::string_view key_name, sql::Aggregate aggregation,
                    const std::optional<std::string>& target_key);

/// Single-row, single-column table.
Table aggregate_data(const Table& data, const std::optional<std::string>& key_name,
                     sql::Aggregate operation);

/// `limit` is >= 1, or -1 for no limit. Distinct keeps first occurrences and
/// is applied before the limit.
Json retrieve_data(const Table& data, std::string_view key_name, bool distinct, std::int64_t limit);

Json select_unique_values(const Table& data, std::string_view key_name);

/// operation_type "substring" with operation_args {start_index, end_index},
/// a 0-based half-open character slice applied in place.
Table transform_data(const Table& data, std::string_view key_name, std::string_view operation_type,
                     const Json& operation_args);

// Helpers that post-process a list of values.
Json distinct_values(const Json& values);
Json limit_values(const Json& values, std::int64_t limit);

/// Name of the aggregate column written by group_data_by/aggregate_data:
/// "count" for a bare count, otherwise "<op>_<target>".
std::string aggregate_column_name(sql::Aggregate op, const std::optional<std::string>& target);

/// SQL LIKE with % and _ wildcards, ASCII case-insensitive.
bool like_match(std::string_view text, std::string_view pattern);

}  // namespace toolbench::runtime::tools
