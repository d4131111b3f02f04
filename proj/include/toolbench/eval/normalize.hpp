#pragma once

#include <string>
#include <vector>

#include "toolbench/util/json.hpp"

namespace toolbench::eval {

/// Flattens nested lists/objects to their leaves and canonicalizes each leaf:
/// numbers (and strings that parse as numbers) rounded to 9 significant
/// digits, other strings trimmed, null kept. The result is sorted, so two
/// answers are equal iff their leaf multisets are.
std::vector<std::string> normalize_answer(const Json& value);

bool answers_equal(const Json& a, const Json& b);

/// JSON view of a normalized multiset, for reports.
Json normalized_json(const Json& value);

}  // namespace toolbench::eval
