#pragma once

#include <string>
#include <vector>

#include "toolbench/util/json.hpp"

namespace toolbench::runtime {

/// One invocation: {"name", "arguments", "label"}. Arguments that consume an
/// earlier output reference it as "$LABEL$".
struct ToolCall {
  std::string name;
  Json arguments = Json::object();
  std::string label;

  Json to_json() const;
  /// Throws Error(schema_error) when name/arguments are missing or mistyped.
  static ToolCall from_json(const Json& j);
};

Json to_json(const std::vector<ToolCall>& calls);

/// "$NAME$" -> "NAME"; anything else -> empty.
std::string referenced_label(const Json& value);

}  // namespace toolbench::runtime
