#pragma once

#include <string>
#include <vector>

#include "toolbench/runtime/tool_call.hpp"
#include "toolbench/sql/ast.hpp"

namespace toolbench::transpile {

struct SlotProgram {
  runtime::ToolCall initialization;
  std::vector<runtime::ToolCall> calls;
};

/// Compiles a parsed query into the initializer plus the gold call sequence:
/// filters (each preceded by its transform), grouping, sorting, one retrieval
/// per projection, and a final aggregation for ungrouped aggregates.
/// Throws Error(unsupported_construct) for queries the tools cannot express.
SlotProgram compile_slot_sequence(const sql::SqlAst& ast, const std::string& db_name);

/// Names of intermediate columns the sequence reads that are not part of the
/// joined schema (aggregate outputs).
std::vector<std::string> derived_columns(const std::vector<runtime::ToolCall>& calls,
                                         const std::vector<std::string>& schema);

}  // namespace toolbench::transpile
