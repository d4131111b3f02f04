#include "toolbench/runtime/pool.hpp"

namespace toolbench::runtime {

std::string_view to_string(Formulation f) {
  switch (f) {
    case Formulation::slot: return "slot";
    case Formulation::sel: return "sel";
    case Formulation::rest: return "rest";
  }
  return "slot";
}

std::optional<Formulation> parse_formulation(std::string_view s) {
  if (s == "slot" || s == "SLOT") return Formulation::slot;
  if (s == "sel" || s == "SEL") return Formulation::sel;
  if (s == "rest" || s == "REST") return Formulation::rest;
  return std::nullopt;
}

const ParamSpec* ToolSpec::find_param(std::string_view n) const {
  for (const auto& p : parameters) {
    if (p.name == n) return &p;
  }
  return nullptr;
}

std::vector<std::string> ToolSpec::required_params() const {
  std::vector<std::string> out;
  for (const auto& p : parameters) {
    if (p.required) out.push_back(p.name);
  }
  return out;
}

const ToolSpec* ToolPool::find(std::string_view name) const {
  for (const auto& t : tools) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

std::vector<std::string> ToolPool::tool_names() const {
  std::vector<std::string> out;
  out.reserve(tools.size());
  for (const auto& t : tools) out.push_back(t.name);
  return out;
}

}  // namespace toolbench::runtime
