#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "toolbench/runtime/pool.hpp"
#include "toolbench/runtime/tool_call.hpp"

namespace toolbench::runtime {

/// One dataset row: utterance, SQL, verified answer and the gold calls.
struct EvalInstance {
  std::int64_t sample_id = 0;
  std::string dataset_name;
  std::string input;
  std::string query;
  Json gold_answer;
  Formulation formulation = Formulation::slot;
  std::vector<ToolCall> output;
  std::optional<ToolCall> initialization_step;  // SLOT and SEL
  std::vector<std::string> available_tools;
  std::string rest_path;                    // REST only
  std::string output_after_executing_api;   // REST only

  Json to_json() const;
  static EvalInstance from_json(const Json& j, Formulation formulation);
};

/// One compact JSON object per line.
std::string to_jsonl(const std::vector<EvalInstance>& instances);
/// Throws Error(schema_error) naming the offending line.
std::vector<EvalInstance> read_dataset(const std::filesystem::path& path, Formulation formulation);

}  // namespace toolbench::runtime
