#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "toolbench/runtime/database.hpp"
#include "toolbench/runtime/pool.hpp"
#include "toolbench/runtime/table.hpp"
#include "toolbench/runtime/tool_call.hpp"
#include "toolbench/util/error.hpp"

namespace toolbench::runtime {

struct ToolResult {
  enum class Kind { table, values };
  Kind kind = Kind::values;
  TableHandle table;
  Json values;

  /// Values as-is; tables as a list of row arrays.
  Json to_answer() const;
};

/// Per-instance execution state. Single-threaded; each instance owns its workdir.
class LabelEnv {
 public:
  LabelEnv(std::filesystem::path workdir, std::filesystem::path database_root);

  const std::filesystem::path& workdir() const { return workdir_; }
  const std::filesystem::path& database_root() const { return database_root_; }

  bool has(const std::string& label) const { return bindings_.count(label) > 0; }
  const ToolResult& get(const std::string& label) const;
  void bind(const std::string& label, ToolResult result);
  void clear() { bindings_.clear(); }

  /// Loads (and caches) the CSV behind a table handle.
  const Table& load(const TableHandle& handle);
  TableHandle store(const std::string& label, const Table& table);

  /// Read-only connection, opened on first use.
  const Database& database(const std::filesystem::path& path);

 private:
  std::filesystem::path workdir_;
  std::filesystem::path database_root_;
  std::map<std::string, ToolResult> bindings_;
  std::map<std::string, Table> table_cache_;
  std::map<std::string, std::unique_ptr<Database>> databases_;
};

struct StepTrace {
  std::size_t index = 0;
  std::string name;
  std::string label;
  bool ok = false;
  std::string error_code;
  std::string error_message;
};

struct ExecutionResult {
  bool ok = false;
  std::optional<ToolResult> final_result;
  Json answer;  // combined output of the sink calls
  std::vector<StepTrace> trace;
  std::optional<std::size_t> failed_step;
  std::optional<ErrorCode> error_code;
  std::string error_message;
};

/// Runs the initializer and binds its output to `starting_table_var`.
TableHandle run_initialization(const ToolCall& init, LabelEnv& env);

/// Executes a single call through the pool, binding its result under its label.
ToolResult invoke_tool(const ToolCall& call, LabelEnv& env, const ToolPool& pool);

/// Executes calls in order and stops at the first failure. The answer is the
/// output of every call whose label no later call consumes (one sink: that
/// output; several: a list of them).
ExecutionResult execute_sequence(const std::vector<ToolCall>& calls, LabelEnv& env,
                                 const ToolPool& pool);

}  // namespace toolbench::runtime
