#pragma once

#include <json.hpp>

namespace toolbench {

// Insertion-ordered so emitted documents keep the field order they were built with.
using Json = nlohmann::ordered_json;

/// Serializes with object keys sorted at every level. Used wherever two
/// documents must compare equal independent of key order.
std::string canonical_dump(const Json& value);

}  // namespace toolbench
