#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "toolbench/rest/endpoint.hpp"
#include "toolbench/util/json.hpp"

namespace toolbench::runtime {

enum class Formulation { slot, sel, rest };

std::string_view to_string(Formulation f);
std::optional<Formulation> parse_formulation(std::string_view s);

struct ColumnDescriptor {
  std::string prefixed_name;
  std::string description;
  std::string dtype;
};

struct ParamSpec {
  std::string name;
  std::string type;  // JSON schema type
  std::string description;
  std::optional<std::string> title;
  bool required = true;
  // Column-valued parameters draw their enum from the pool's column_enum.
  bool column_valued = false;
  std::vector<std::string> enum_values;
  // Set by obfuscation: the name this parameter had before renaming.
  std::optional<std::string> original_name;
};

/// Description of one tool plus how calls to it are dispatched.
struct ToolSpec {
  std::string name;
  std::string description;
  std::vector<ParamSpec> parameters;
  std::vector<std::pair<std::string, std::string>> outputs;  // name -> description
  std::string output_type = "string";
  std::optional<std::string> path;  // REST only

  // Dispatch: calls run `base_tool` with `bound_args` merged in; exposed
  // argument names are translated through `arg_map` (absent = unchanged).
  std::string base_tool;
  Json bound_args = Json::object();
  std::map<std::string, std::string> arg_map;

  const ParamSpec* find_param(std::string_view n) const;
  std::vector<std::string> required_params() const;
};

struct ToolPool {
  Formulation formulation = Formulation::slot;
  std::vector<ToolSpec> tools;
  std::vector<ColumnDescriptor> column_enum;
  std::map<std::string, rest::RestEndpoint> endpoints;  // keyed by endpoint name

  const ToolSpec* find(std::string_view name) const;
  std::vector<std::string> tool_names() const;
};

/// Base tool used to run REST endpoints; bound_args carries {"endpoint": name}.
inline constexpr std::string_view kRestBaseTool = "rest_endpoint";

}  // namespace toolbench::runtime
