#pragma once

#include <string_view>

#include "toolbench/sql/ast.hpp"

namespace toolbench::sql {

/// Parses one read-only SELECT in the supported dialect. Throws Error with
/// syntax_error for malformed input and unsupported_construct (message names
/// the construct) for anything outside the dialect.
SqlAst parse_sql(std::string_view text);

}  // namespace toolbench::sql
