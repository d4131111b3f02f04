#include "toolbench/sql/ast.hpp"

#include <functional>

#include "toolbench/util/strings.hpp"

namespace toolbench::sql {

std::string_view to_string(Aggregate a) {
  switch (a) {
    case Aggregate::count: return "count";
    case Aggregate::sum: return "sum";
    case Aggregate::avg: return "avg";
    case Aggregate::min: return "min";
    case Aggregate::max: return "max";
  }
  return "count";
}

std::optional<Aggregate> parse_aggregate(std::string_view name) {
  for (auto a : kAllAggregates)
    if (to_string(a) == name) return a;
  return std::nullopt;
}

std::string_view to_string(ConditionKind c) {
  switch (c) {
    case ConditionKind::equal_to: return "equal_to";
    case ConditionKind::not_equal_to: return "not_equal_to";
    case ConditionKind::greater_than: return "greater_than";
    case ConditionKind::less_than: return "less_than";
    case ConditionKind::greater_than_equal_to: return "greater_than_equal_to";
    case ConditionKind::less_than_equal_to: return "less_than_equal_to";
    case ConditionKind::contains: return "contains";
    case ConditionKind::like: return "like";
  }
  return "equal_to";
}

std::optional<ConditionKind> parse_condition(std::string_view name) {
  for (auto c : kAllConditions)
    if (to_string(c) == name) return c;
  return std::nullopt;
}

Literal Literal::integer(std::int64_t v) {
  return Literal{Kind::integer, std::to_string(v), static_cast<double>(v)};
}

Literal Literal::real(double v) { return Literal{Kind::real, util::format_real(v), v}; }

Literal Literal::string(std::string s) { return Literal{Kind::text, std::move(s), 0}; }

Json Literal::to_tool_value() const {
  if (is_numeric()) return number;
  return text;
}

Expr Expr::make_column(ColumnRef c) {
  Expr e;
  e.kind = Kind::column;
  e.column = std::move(c);
  return e;
}

std::optional<ColumnRef> Expr::first_column() const {
  if (kind == Kind::column) return column;
  for (const auto& a : args)
    if (auto c = a.first_column()) return c;
  return std::nullopt;
}

bool Expr::contains_aggregate() const {
  if (kind == Kind::aggregate) return true;
  for (const auto& a : args)
    if (a.contains_aggregate()) return true;
  return false;
}

std::vector<std::pair<std::string, std::string>> SqlAst::table_aliases() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& t : tables) out.emplace_back(t.alias, t.name);
  return out;
}

std::vector<ColumnRef> SqlAst::column_refs() const {
  std::vector<ColumnRef> out;
  std::function<void(const Expr&)> walk = [&](const Expr& e) {
    if (e.kind == Expr::Kind::column) out.push_back(e.column);
    for (const auto& a : e.args) walk(a);
  };
  for (const auto& p : select_items) walk(p.expr);
  for (const auto& j : joins) {
    out.push_back(j.left_col);
    out.push_back(j.right_col);
  }
  for (const auto& p : where_conjuncts) out.push_back(p.column);
  if (group_by) out.push_back(group_by->key);
  if (order_by) walk(order_by->expr);
  return out;
}

std::vector<LiteralBinding> extract_literals(const SqlAst& ast) {
  std::vector<LiteralBinding> out;
  out.reserve(ast.where_conjuncts.size());
  for (const auto& p : ast.where_conjuncts)
    out.push_back({p.column, p.condition, p.value, p.transform.has_value()});
  return out;
}

}  // namespace toolbench::sql
