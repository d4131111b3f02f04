#include "toolbench/runtime/tool_call.hpp"

#include "toolbench/util/error.hpp"

namespace toolbench::runtime {

Json ToolCall::to_json() const {
  Json j = Json::object();
  j["name"] = name;
  j["arguments"] = arguments;
  j["label"] = label;
  return j;
}

ToolCall ToolCall::from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::schema_error, "tool call must be an object");
  auto it = j.find("name");
  if (it == j.end() || !it->is_string()) {
    throw Error(ErrorCode::schema_error, "tool call lacks a string name");
  }
  ToolCall call;
  call.name = it->get<std::string>();
  if (auto a = j.find("arguments"); a != j.end() && !a->is_null()) {
    if (!a->is_object()) throw Error(ErrorCode::schema_error, "arguments must be an object");
    call.arguments = *a;
  }
  if (auto l = j.find("label"); l != j.end() && !l->is_null()) {
    if (!l->is_string()) throw Error(ErrorCode::schema_error, "label must be a string");
    call.label = l->get<std::string>();
  }
  return call;
}

Json to_json(const std::vector<ToolCall>& calls) {
  Json out = Json::array();
  for (const auto& c : calls) out.push_back(c.to_json());
  return out;
}

std::string referenced_label(const Json& value) {
  if (!value.is_string()) return {};
  const auto& s = value.get_ref<const std::string&>();
  if (s.size() >= 3 && s.front() == '$' && s.back() == '$') return s.substr(1, s.size() - 2);
  return {};
}

}  // namespace toolbench::runtime
