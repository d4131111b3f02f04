#pragma once

#include <string>

#include "toolbench/sql/ast.hpp"

namespace toolbench::sql {

struct RenderOptions {
  // Replace WHERE literals with `?` placeholders in source order.
  bool placeholders = false;
};

/// Renders the AST back to SQLite-compatible SQL with canonical aliases
/// T1..Tn in FROM order and every identifier double-quoted. Two queries that
/// differ only in whitespace, alias spelling or (with placeholders) WHERE
/// literal values render identically.
std::string render_sql(const SqlAst& ast, const RenderOptions& options = {});

}  // namespace toolbench::sql
