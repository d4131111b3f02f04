#pragma once

#include <vector>

#include "toolbench/runtime/tool_call.hpp"

namespace toolbench::transpile {

/// Call-for-call rewrite of a SLOT sequence into SEL tools. Categorical
/// arguments move into the tool name; a retrieval becomes a getter, followed
/// by distinct_values/limit_values when those options are set.
std::vector<runtime::ToolCall> rewrite_to_sel_sequence(const std::vector<runtime::ToolCall>& slot_calls);

}  // namespace toolbench::transpile
