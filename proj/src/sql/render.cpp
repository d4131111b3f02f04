#include "toolbench/sql/render.hpp"

#include <map>

#include "toolbench/util/error.hpp"
#include "toolbench/util/strings.hpp"

namespace toolbench::sql {

namespace {

std::string quote_ident(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string quote_string(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += '\'';
    out += c;
  }
  return out + "'";
}

class Renderer {
 public:
  Renderer(const SqlAst& ast, const RenderOptions& options) : ast_(ast), options_(options) {
    for (std::size_t i = 0; i < ast.tables.size(); ++i)
      alias_of_table_[ast.tables[i].name] = "T" + std::to_string(i + 1);
  }

  std::string render() {
    std::string sql = "SELECT ";
    if (ast_.distinct) sql += "DISTINCT ";
    for (std::size_t i = 0; i < ast_.select_items.size(); ++i) {
      if (i) sql += ", ";
      sql += expr(ast_.select_items[i].expr);
    }
    sql += " FROM " + quote_ident(ast_.tables[0].name) + " AS T1";
    for (std::size_t i = 0; i < ast_.joins.size(); ++i) {
      const auto& t = ast_.tables[i + 1];
      sql += " INNER JOIN " + quote_ident(t.name) + " AS " + alias_of_table_.at(t.name) + " ON " +
             column(ast_.joins[i].left_col) + " = " + column(ast_.joins[i].right_col);
    }
    if (!ast_.where_conjuncts.empty()) {
      sql += " WHERE ";
      for (std::size_t i = 0; i < ast_.where_conjuncts.size(); ++i) {
        if (i) sql += " AND ";
        sql += predicate(ast_.where_conjuncts[i]);
      }
    }
    if (ast_.group_by) sql += " GROUP BY " + column(ast_.group_by->key);
    if (ast_.order_by)
      sql += " ORDER BY " + expr(ast_.order_by->expr) + (ast_.order_by->ascending ? " ASC" : " DESC");
    if (ast_.limit) sql += " LIMIT " + std::to_string(*ast_.limit);
    return sql;
  }

 private:
  const SqlAst& ast_;
  const RenderOptions& options_;
  std::map<std::string, std::string> alias_of_table_;

  std::string column(const ColumnRef& c) const {
    return alias_of_table_.at(c.table) + "." + quote_ident(c.column);
  }

  std::string literal(const Literal& l) const {
    return l.kind == Literal::Kind::text ? quote_string(l.text) : l.text;
  }

  std::string where_value(const Literal& l) const { return options_.placeholders ? "?" : literal(l); }

  std::string substr(const std::string& inner, const Substring& s) const {
    return "SUBSTR(" + inner + ", " + std::to_string(s.start_index + 1) + ", " +
           std::to_string(s.end_index - s.start_index) + ")";
  }

  std::string predicate(const Predicate& p) const {
    std::string lhs = column(p.column);
    if (p.transform) lhs = substr(lhs, *p.transform);
    switch (p.condition) {
      case ConditionKind::equal_to: return lhs + " = " + where_value(p.value);
      case ConditionKind::not_equal_to: return lhs + " <> " + where_value(p.value);
      case ConditionKind::greater_than: return lhs + " > " + where_value(p.value);
      case ConditionKind::less_than: return lhs + " < " + where_value(p.value);
      case ConditionKind::greater_than_equal_to: return lhs + " >= " + where_value(p.value);
      case ConditionKind::less_than_equal_to: return lhs + " <= " + where_value(p.value);
      case ConditionKind::contains: return "INSTR(" + lhs + ", " + where_value(p.value) + ") > 0";
      case ConditionKind::like: return lhs + " LIKE " + where_value(p.value);
    }
    return lhs;
  }

  std::string expr(const Expr& e) const {
    switch (e.kind) {
      case Expr::Kind::column: return column(e.column);
      case Expr::Kind::literal: return literal(e.literal);
      case Expr::Kind::star: return "*";
      case Expr::Kind::aggregate:
        return util::to_upper(to_string(e.aggregate)) + "(" +
               (e.args.empty() ? std::string("*") : expr(e.args[0])) + ")";
      case Expr::Kind::substring: return substr(expr(e.args[0]), e.substring);
      case Expr::Kind::cast: return "CAST(" + expr(e.args[0]) + " AS " + e.cast_type + ")";
      case Expr::Kind::binary:
        return "(" + expr(e.args[0]) + " " + std::string(1, e.op) + " " + expr(e.args[1]) + ")";
    }
    throw Error(ErrorCode::syntax_error, "unrenderable expression");
  }
};

}  // namespace

std::string render_sql(const SqlAst& ast, const RenderOptions& options) {
  return Renderer(ast, options).render();
}

}  // namespace toolbench::sql
