#include "toolbench/util/json.hpp"

namespace toolbench {

namespace {

nlohmann::json sorted_copy(const Json& value) {
  if (value.is_object()) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [k, v] : value.items()) out[k] = sorted_copy(v);
    return out;
  }
  if (value.is_array()) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& v : value) out.push_back(sorted_copy(v));
    return out;
  }
  return nlohmann::json::parse(value.dump());
}

}  // namespace

std::string canonical_dump(const Json& value) { return sorted_copy(value).dump(); }

}  // namespace toolbench
