#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "toolbench/runtime/tool_call.hpp"
#include "toolbench/util/json.hpp"

namespace toolbench::eval {

enum class ParseStage { json, literal, xml_tags, fenced_block, failed };

std::string_view to_string(ParseStage s);

struct ParsedPrediction {
  std::vector<runtime::ToolCall> calls;
  ParseStage stage = ParseStage::failed;
  std::string raw_text;
  // Recovered list before conversion to calls (flattened).
  Json payload = Json::array();
  // Every payload element is {"name": string, "arguments": object, ...}.
  bool well_formed = false;

  Json to_json() const;
};

/// Tries strict JSON (or JSON lines), then Python literal syntax, then
/// <tool_call> tags, then the last ```json fenced block. Leading prose and
/// redundant list nesting are removed; trailing text is not.
ParsedPrediction parse_model_output(std::string_view text);

/// Python literal syntax (dicts, lists, tuples, quoted strings, numbers,
/// True/False/None) as JSON. Returns nullopt on any syntax error or
/// trailing input.
std::optional<Json> parse_python_literal(std::string_view text);

}  // namespace toolbench::eval
