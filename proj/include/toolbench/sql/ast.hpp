#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "toolbench/util/json.hpp"

namespace toolbench::sql {

enum class Aggregate { count, sum, avg, min, max };

std::string_view to_string(Aggregate a);
std::optional<Aggregate> parse_aggregate(std::string_view name);

enum class ConditionKind {
  equal_to,
  not_equal_to,
  greater_than,
  less_than,
  greater_than_equal_to,
  less_than_equal_to,
  contains,
  like,
};

inline constexpr ConditionKind kAllConditions[] = {
    ConditionKind::equal_to,      ConditionKind::not_equal_to,
    ConditionKind::greater_than,  ConditionKind::less_than,
    ConditionKind::greater_than_equal_to, ConditionKind::less_than_equal_to,
    ConditionKind::contains,      ConditionKind::like,
};

inline constexpr Aggregate kAllAggregates[] = {Aggregate::count, Aggregate::sum, Aggregate::avg,
                                               Aggregate::min, Aggregate::max};

std::string_view to_string(ConditionKind c);
std::optional<ConditionKind> parse_condition(std::string_view name);

/// A literal as written in the query. Numbers keep their source text so
/// rendering is lossless; `number` holds the parsed value.
struct Literal {
  enum class Kind { integer, real, text };
  Kind kind = Kind::text;
  std::string text;
  double number = 0;

  static Literal integer(std::int64_t v);
  static Literal real(double v);
  static Literal string(std::string s);

  bool is_numeric() const { return kind != Kind::text; }
  /// Tool-argument form: numbers become floats, strings stay strings.
  Json to_tool_value() const;
  bool operator==(const Literal& o) const { return kind == o.kind && text == o.text; }
};

struct ColumnRef {
  std::string table;   // resolved table name
  std::string alias;   // alias as written in the query (may equal table)
  std::string column;  // raw column name, spaces preserved

  std::string prefixed_name() const { return table + "_" + column; }
  bool operator==(const ColumnRef& o) const { return table == o.table && column == o.column; }
};

/// 0-based half-open character slice, i.e. SQL SUBSTR(x, start_index + 1, end_index - start_index).
struct Substring {
  std::int64_t start_index = 0;
  std::int64_t end_index = 0;
  bool operator==(const Substring&) const = default;
};

/// Value expression used in projections and ORDER BY.
struct Expr {
  enum class Kind { column, literal, star, aggregate, substring, cast, binary };
  Kind kind = Kind::column;
  ColumnRef column;
  Literal literal;
  Aggregate aggregate = Aggregate::count;
  Substring substring;
  std::string cast_type;
  char op = 0;
  std::vector<Expr> args;

  static Expr make_column(ColumnRef c);

  /// First column referenced in evaluation order, if any.
  std::optional<ColumnRef> first_column() const;
  bool contains_aggregate() const;
};

struct Projection {
  Expr expr;
  std::optional<ColumnRef> column;  // empty only for COUNT(*)
  std::optional<Aggregate> aggregate;
  std::optional<std::string> alias;
  bool derived = false;  // anything beyond a plain column or aggregate(column)
};

struct TableRef {
  std::string name;
  std::string alias;
};

enum class JoinKind { inner };

struct JoinSpec {
  ColumnRef left_col;
  ColumnRef right_col;
  JoinKind kind = JoinKind::inner;
};

struct Predicate {
  ColumnRef column;
  ConditionKind condition = ConditionKind::equal_to;
  Literal value;
  std::optional<Substring> transform;
};

struct GroupSpec {
  ColumnRef key;
  std::optional<Aggregate> aggregation;
  std::optional<ColumnRef> target;  // empty for COUNT(*)
};

struct OrderSpec {
  Expr expr;
  std::optional<ColumnRef> key;
  std::optional<Aggregate> aggregate;
  std::optional<Substring> transform;
  bool ascending = true;
  bool derived = false;  // arithmetic or other non pass-through expression
};

struct SqlAst {
  bool distinct = false;
  std::vector<Projection> select_items;
  std::vector<TableRef> tables;  // FROM order; tables[0] is the base table
  std::vector<JoinSpec> joins;
  std::vector<Predicate> where_conjuncts;
  std::optional<GroupSpec> group_by;
  std::optional<OrderSpec> order_by;
  std::optional<std::int64_t> limit;

  /// alias -> table name, FROM order preserved.
  std::vector<std::pair<std::string, std::string>> table_aliases() const;
  /// Every ColumnRef in the tree, in source order.
  std::vector<ColumnRef> column_refs() const;
};

struct LiteralBinding {
  ColumnRef column;
  ConditionKind condition;
  Literal value;
  bool transformed = false;
};

/// Conjunct literals in source order.
std::vector<LiteralBinding> extract_literals(const SqlAst& ast);

}  // namespace toolbench::sql
