#include "toolbench/sql/parser.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "lexer.hpp"
#include "toolbench/util/error.hpp"
#include "toolbench/util/strings.hpp"

namespace toolbench::sql {

namespace {

using detail::Token;
using detail::TokenKind;

[[noreturn]] void unsupported(const std::string& construct) {
  throw Error(ErrorCode::unsupported_construct, "unsupported construct: " + construct);
}

[[noreturn]] void syntax(const std::string& what, const Token& at) {
  throw Error(ErrorCode::syntax_error,
              what + " at offset " + std::to_string(at.pos) +
                  (at.kind == TokenKind::end ? " (end of input)" : " near '" + at.text + "'"));
}

const std::set<std::string> kReserved = {
    "SELECT", "FROM",  "WHERE", "GROUP",  "ORDER",  "BY",    "LIMIT",  "AS",     "ON",
    "JOIN",   "INNER", "LEFT",  "RIGHT",  "FULL",   "CROSS", "OUTER",  "NATURAL", "AND",
    "OR",     "NOT",   "ASC",   "DESC",   "HAVING", "UNION", "INTERSECT", "EXCEPT", "LIKE",
    "BETWEEN", "IN",   "IS",    "CASE",   "WHEN",   "THEN",  "ELSE",   "END",    "DISTINCT",
    "OFFSET", "USING", "WITH",  "EXISTS", "NULL",   "GLOB",  "ESCAPE", "WINDOW", "OVER"};

const std::set<std::string> kWriteVerbs = {"INSERT", "UPDATE", "DELETE", "DROP",   "CREATE",
                                           "ALTER",  "REPLACE", "ATTACH", "DETACH", "PRAGMA",
                                           "VACUUM", "REINDEX", "UPSERT", "MERGE",  "TRUNCATE"};

class Parser {
 public:
  explicit Parser(std::string_view text) : tokens_(detail::tokenize(text)) {}

  SqlAst parse() {
    const Token& first = peek();
    if (first.kind == TokenKind::end) syntax("empty query", first);
    if (first.kind == TokenKind::identifier) {
      auto kw = util::to_upper(first.text);
      if (kWriteVerbs.count(kw)) unsupported(kw + " statement");
      if (kw == "WITH") unsupported("WITH (common table expression)");
    }
    SqlAst ast = parse_select();
    while (accept_symbol(";")) {
    }
    const Token& rest = peek();
    if (rest.kind != TokenKind::end) {
      auto kw = util::to_upper(rest.text);
      if (rest.kind == TokenKind::identifier &&
          (kw == "UNION" || kw == "INTERSECT" || kw == "EXCEPT"))
        unsupported(kw);
      if (rest.kind == TokenKind::identifier && (kw == "SELECT" || kWriteVerbs.count(kw)))
        unsupported("multiple statements");
      syntax("unexpected trailing token", rest);
    }
    resolve(ast);
    classify(ast);
    return ast;
  }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;

  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  const Token& next() {
    const Token& t = peek();
    if (pos_ < tokens_.size() - 1) ++pos_;
    return t;
  }

  bool is_keyword(const Token& t, std::string_view kw) const {
    return t.kind == TokenKind::identifier && util::iequals(t.text, kw);
  }
  bool accept_keyword(std::string_view kw) {
    if (is_keyword(peek(), kw)) {
      next();
      return true;
    }
    return false;
  }
  void expect_keyword(std::string_view kw) {
    if (!accept_keyword(kw)) syntax("expected " + std::string(kw), peek());
  }
  bool is_symbol(const Token& t, std::string_view s) const {
    return t.kind == TokenKind::symbol && t.text == s;
  }
  bool accept_symbol(std::string_view s) {
    if (is_symbol(peek(), s)) {
      next();
      return true;
    }
    return false;
  }
  void expect_symbol(std::string_view s) {
    if (!accept_symbol(s)) syntax("expected '" + std::string(s) + "'", peek());
  }

  bool is_name_token(const Token& t) const {
    if (t.kind == TokenKind::quoted_identifier) return true;
    return t.kind == TokenKind::identifier && !kReserved.count(util::to_upper(t.text));
  }

  std::string expect_name(const char* what) {
    const Token& t = peek();
    if (!is_name_token(t)) {
      if (is_keyword(t, "SELECT")) unsupported("nested SELECT");
      if (is_keyword(t, "CASE")) unsupported("CASE expression");
      syntax(std::string("expected ") + what, t);
    }
    return next().text;
  }

  // Rejects keywords that introduce constructs outside the dialect wherever they appear.
  void reject_out_of_dialect(const Token& t) {
    if (t.kind != TokenKind::identifier) return;
    auto kw = util::to_upper(t.text);
    if (kw == "CASE") unsupported("CASE expression");
    if (kw == "SELECT") unsupported("nested SELECT");
    if (kw == "OR") unsupported("OR");
    if (kw == "EXISTS") unsupported("EXISTS");
    if (kw == "IIF") unsupported("IIF");
    if (kw == "OVER") unsupported("window function");
  }

  SqlAst parse_select() {
    SqlAst ast;
    expect_keyword("SELECT");
    if (accept_keyword("DISTINCT")) ast.distinct = true;
    else accept_keyword("ALL");
    if (is_keyword(peek(), "TOP")) unsupported("TOP");

    do {
      if (is_symbol(peek(), "*")) unsupported("SELECT *");
      Projection p;
      p.expr = parse_expr();
      if (accept_keyword("AS")) {
        const Token& t = next();
        if (t.kind != TokenKind::identifier && t.kind != TokenKind::quoted_identifier &&
            t.kind != TokenKind::string)
          syntax("expected alias", t);
        p.alias = t.text;
      } else if (is_name_token(peek())) {
        p.alias = next().text;
      }
      ast.select_items.push_back(std::move(p));
    } while (accept_symbol(","));

    expect_keyword("FROM");
    ast.tables.push_back(parse_table_ref());
    if (is_symbol(peek(), ",")) unsupported("implicit comma join");

    while (true) {
      const Token& t = peek();
      if (t.kind == TokenKind::identifier) {
        auto kw = util::to_upper(t.text);
        if (kw == "LEFT" || kw == "RIGHT" || kw == "FULL" || kw == "CROSS" || kw == "NATURAL" ||
            kw == "OUTER")
          unsupported(kw + " JOIN");
      }
      if (accept_keyword("INNER")) {
        expect_keyword("JOIN");
      } else if (!accept_keyword("JOIN")) {
        break;
      }
      ast.tables.push_back(parse_table_ref());
      if (is_keyword(peek(), "USING")) unsupported("JOIN ... USING");
      expect_keyword("ON");
      JoinSpec join;
      join.left_col = parse_column_ref();
      if (!accept_symbol("=") && !accept_symbol("==")) {
        if (peek().kind == TokenKind::symbol) unsupported("non-equality join condition");
        syntax("expected '=' in join condition", peek());
      }
      join.right_col = parse_column_ref();
      if (is_keyword(peek(), "AND")) unsupported("multi-condition join");
      if (is_keyword(peek(), "OR")) unsupported("OR");
      ast.joins.push_back(std::move(join));
    }

    if (accept_keyword("WHERE")) parse_conjunction(ast.where_conjuncts);

    if (accept_keyword("GROUP")) {
      expect_keyword("BY");
      GroupSpec g;
      g.key = parse_column_ref();
      if (is_symbol(peek(), ",")) unsupported("multi-column GROUP BY");
      ast.group_by = std::move(g);
      if (is_keyword(peek(), "HAVING")) unsupported("HAVING");
    }
    if (is_keyword(peek(), "HAVING")) unsupported("HAVING");

    if (accept_keyword("ORDER")) {
      expect_keyword("BY");
      OrderSpec o;
      o.expr = parse_expr();
      if (accept_keyword("DESC")) o.ascending = false;
      else accept_keyword("ASC");
      if (is_keyword(peek(), "NULLS")) unsupported("NULLS FIRST/LAST");
      if (is_symbol(peek(), ",")) unsupported("multi-key ORDER BY");
      ast.order_by = std::move(o);
    }

    if (accept_keyword("LIMIT")) {
      const Token& t = next();
      if (t.kind != TokenKind::number) syntax("expected LIMIT count", t);
      auto n = util::parse_integer(t.text);
      if (!n || *n < 0) syntax("LIMIT must be a non-negative integer", t);
      if (is_symbol(peek(), ",")) unsupported("LIMIT with offset");
      if (is_keyword(peek(), "OFFSET")) unsupported("OFFSET");
      ast.limit = *n;
    }
    for (auto kw : {"UNION", "INTERSECT", "EXCEPT"})
      if (is_keyword(peek(), kw)) unsupported(kw);
    return ast;
  }

  TableRef parse_table_ref() {
    if (is_symbol(peek(), "(")) {
      if (is_keyword(peek(1), "SELECT")) unsupported("nested SELECT");
      syntax("expected table name", peek());
    }
    TableRef ref;
    ref.name = expect_name("table name");
    if (accept_keyword("AS")) ref.alias = expect_name("table alias");
    else if (is_name_token(peek())) ref.alias = next().text;
    if (ref.alias.empty()) ref.alias = ref.name;
    return ref;
  }

  ColumnRef parse_column_ref() {
    ColumnRef c;
    std::string first = expect_name("column");
    if (accept_symbol(".")) {
      c.alias = std::move(first);
      c.column = expect_name("column");
    } else {
      c.column = std::move(first);
    }
    return c;
  }

  Literal parse_literal() {
    bool negative = false;
    if (is_symbol(peek(), "-")) {
      next();
      negative = true;
    }
    const Token& t = peek();
    if (t.kind == TokenKind::string && !negative) {
      next();
      return Literal::string(t.text);
    }
    if (t.kind == TokenKind::number) {
      next();
      std::string text = (negative ? "-" : "") + t.text;
      Literal lit;
      lit.text = text;
      if (auto i = util::parse_integer(text)) {
        lit.kind = Literal::Kind::integer;
        lit.number = static_cast<double>(*i);
      } else if (auto d = util::parse_number(text)) {
        lit.kind = Literal::Kind::real;
        lit.number = *d;
      } else {
        syntax("malformed number", t);
      }
      return lit;
    }
    if (is_symbol(t, "(") && is_keyword(peek(1), "SELECT")) unsupported("nested SELECT");
    if (is_keyword(t, "NULL")) unsupported("NULL literal");
    reject_out_of_dialect(t);
    if (is_name_token(t)) unsupported("column comparison in WHERE");
    syntax("expected literal", t);
  }

  void parse_conjunction(std::vector<Predicate>& out) {
    while (true) {
      parse_conjunct(out);
      if (is_keyword(peek(), "OR")) unsupported("OR");
      if (!accept_keyword("AND")) break;
    }
  }

  void parse_conjunct(std::vector<Predicate>& out) {
    reject_out_of_dialect(peek());
    if (is_keyword(peek(), "NOT")) unsupported("NOT");
    if (is_symbol(peek(), "(")) {
      if (is_keyword(peek(1), "SELECT")) unsupported("nested SELECT");
      next();
      parse_conjunction(out);
      expect_symbol(")");
      return;
    }

    Predicate p;
    bool instr = false;
    if (peek().kind == TokenKind::identifier && is_symbol(peek(1), "(")) {
      auto fn = util::to_upper(peek().text);
      if (fn == "SUBSTR" || fn == "SUBSTRING") {
        next();
        next();
        p.column = parse_column_ref();
        p.transform = parse_substring_args();
      } else if (fn == "INSTR") {
        next();
        next();
        p.column = parse_column_ref();
        expect_symbol(",");
        const Token& needle = next();
        if (needle.kind != TokenKind::string) unsupported("INSTR with non-string needle");
        p.value = Literal::string(needle.text);
        expect_symbol(")");
        instr = true;
      } else {
        reject_out_of_dialect(peek());
        unsupported("function " + fn + " in WHERE");
      }
    } else {
      p.column = parse_column_ref();
    }

    const Token& op = peek();
    if (instr) {
      // INSTR(col, 'x') > 0 is the dialect's spelling of `contains`.
      next();
      const Token& rhs = next();
      bool positive = (op.text == ">" && rhs.text == "0") || (op.text == ">=" && rhs.text == "1") ||
                      ((op.text == "!=" || op.text == "<>") && rhs.text == "0");
      if (op.kind != TokenKind::symbol || rhs.kind != TokenKind::number || !positive)
        unsupported("INSTR comparison other than > 0");
      p.condition = ConditionKind::contains;
      out.push_back(std::move(p));
      return;
    }
    if (op.kind == TokenKind::identifier) {
      auto kw = util::to_upper(op.text);
      if (kw == "LIKE") {
        next();
        p.condition = ConditionKind::like;
        p.value = parse_literal();
        if (p.value.kind != Literal::Kind::text) unsupported("LIKE with numeric pattern");
        if (is_keyword(peek(), "ESCAPE")) unsupported("LIKE ... ESCAPE");
        out.push_back(std::move(p));
        return;
      }
      if (kw == "NOT") unsupported("NOT " + util::to_upper(peek(1).text));
      if (kw == "BETWEEN") unsupported("BETWEEN");
      if (kw == "IN") unsupported("IN");
      if (kw == "IS") unsupported("IS NULL");
      if (kw == "GLOB") unsupported("GLOB");
      syntax("expected comparison operator", op);
    }
    if (op.kind != TokenKind::symbol) syntax("expected comparison operator", op);
    if (op.text == "=" || op.text == "==") p.condition = ConditionKind::equal_to;
    else if (op.text == "!=" || op.text == "<>") p.condition = ConditionKind::not_equal_to;
    else if (op.text == ">") p.condition = ConditionKind::greater_than;
    else if (op.text == "<") p.condition = ConditionKind::less_than;
    else if (op.text == ">=") p.condition = ConditionKind::greater_than_equal_to;
    else if (op.text == "<=") p.condition = ConditionKind::less_than_equal_to;
    else if (op.text == "+" || op.text == "-" || op.text == "*" || op.text == "/")
      unsupported("arithmetic in WHERE");
    else
      syntax("expected comparison operator", op);
    next();
    p.value = parse_literal();
    if (is_symbol(peek(), "+") || is_symbol(peek(), "-") || is_symbol(peek(), "*") ||
        is_symbol(peek(), "/"))
      unsupported("arithmetic in WHERE");
    out.push_back(std::move(p));
  }

  // After the opening paren and column: ", start, length )".
  Substring parse_substring_args() {
    expect_symbol(",");
    Literal start = parse_literal();
    if (start.kind != Literal::Kind::integer) unsupported("SUBSTR with non-integer start");
    if (!accept_symbol(",")) unsupported("SUBSTR without length");
    Literal length = parse_literal();
    if (length.kind != Literal::Kind::integer) unsupported("SUBSTR with non-integer length");
    expect_symbol(")");
    auto s = static_cast<std::int64_t>(start.number);
    auto n = static_cast<std::int64_t>(length.number);
    if (s < 1 || n < 0) unsupported("SUBSTR with non-positive start or negative length");
    return Substring{s - 1, s - 1 + n};
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    while (is_symbol(peek(), "+") || is_symbol(peek(), "-")) {
      Expr bin;
      bin.kind = Expr::Kind::binary;
      bin.op = next().text[0];
      bin.args.push_back(std::move(lhs));
      bin.args.push_back(parse_term());
      lhs = std::move(bin);
    }
    if (is_symbol(peek(), "||")) unsupported("string concatenation");
    return lhs;
  }

  Expr parse_term() {
    Expr lhs = parse_primary();
    while (is_symbol(peek(), "*") || is_symbol(peek(), "/")) {
      Expr bin;
      bin.kind = Expr::Kind::binary;
      bin.op = next().text[0];
      bin.args.push_back(std::move(lhs));
      bin.args.push_back(parse_primary());
      lhs = std::move(bin);
    }
    if (is_symbol(peek(), "%")) unsupported("modulo");
    return lhs;
  }

  Expr parse_primary() {
    const Token& t = peek();
    reject_out_of_dialect(t);
    if (is_symbol(t, "(")) {
      if (is_keyword(peek(1), "SELECT")) unsupported("nested SELECT");
      next();
      Expr inner = parse_expr();
      expect_symbol(")");
      return inner;
    }
    if (t.kind == TokenKind::number || t.kind == TokenKind::string || is_symbol(t, "-")) {
      Expr e;
      e.kind = Expr::Kind::literal;
      e.literal = parse_literal();
      return e;
    }
    if (t.kind == TokenKind::identifier && is_symbol(peek(1), "(")) {
      auto fn = util::to_upper(t.text);
      next();
      next();
      if (auto agg = parse_aggregate(util::to_lower(fn))) {
        Expr e;
        e.kind = Expr::Kind::aggregate;
        e.aggregate = *agg;
        if (is_keyword(peek(), "DISTINCT")) unsupported(fn + "(DISTINCT ...)");
        if (accept_symbol("*")) {
          if (*agg != Aggregate::count) syntax(fn + "(*) is not valid", t);
          e.kind = Expr::Kind::aggregate;
        } else {
          e.args.push_back(parse_expr());
          if (e.args.back().contains_aggregate()) unsupported("nested aggregate");
        }
        expect_symbol(")");
        return e;
      }
      if (fn == "SUBSTR" || fn == "SUBSTRING") {
        Expr e;
        e.kind = Expr::Kind::substring;
        e.args.push_back(Expr::make_column(parse_column_ref()));
        e.substring = parse_substring_args();
        return e;
      }
      if (fn == "CAST") {
        Expr e;
        e.kind = Expr::Kind::cast;
        e.args.push_back(parse_expr());
        expect_keyword("AS");
        e.cast_type = util::to_upper(expect_name("type name"));
        if (e.cast_type != "REAL" && e.cast_type != "INTEGER" && e.cast_type != "TEXT" &&
            e.cast_type != "NUMERIC" && e.cast_type != "FLOAT")
          unsupported("CAST to " + e.cast_type);
        expect_symbol(")");
        return e;
      }
      unsupported("function " + fn);
    }
    if (is_name_token(t)) return Expr::make_column(parse_column_ref());
    syntax("expected expression", t);
  }

  // Resolution: bind every ColumnRef qualifier to a table from FROM.
  void resolve(SqlAst& ast) {
    std::vector<std::pair<std::string, std::string>> aliases;  // alias, table
    for (const auto& t : ast.tables) {
      for (const auto& [a, _] : aliases)
        if (util::iequals(a, t.alias)) unsupported("duplicate table alias " + t.alias);
      for (const auto& other : ast.tables)
        if (&other != &t && util::iequals(other.name, t.name))
          unsupported("self-join on " + t.name);
      aliases.emplace_back(t.alias, t.name);
    }
    auto resolve_ref = [&](ColumnRef& c) {
      if (c.alias.empty()) {
        if (ast.tables.size() != 1)
          unsupported("unqualified column " + c.column + " in multi-table query");
        c.alias = ast.tables[0].alias;
        c.table = ast.tables[0].name;
        return;
      }
      for (const auto& [a, table] : aliases) {
        if (util::iequals(a, c.alias)) {
          c.table = table;
          return;
        }
      }
      for (const auto& [a, table] : aliases) {
        if (util::iequals(table, c.alias)) {
          c.table = table;
          return;
        }
      }
      throw Error(ErrorCode::syntax_error, "unknown table alias '" + c.alias + "'");
    };
    std::function<void(Expr&)> resolve_expr = [&](Expr& e) {
      if (e.kind == Expr::Kind::column) resolve_ref(e.column);
      for (auto& a : e.args) resolve_expr(a);
    };
    for (auto& p : ast.select_items) resolve_expr(p.expr);
    for (std::size_t i = 0; i < ast.joins.size(); ++i) {
      auto& j = ast.joins[i];
      resolve_ref(j.left_col);
      resolve_ref(j.right_col);
      // The (i+1)-th table must be joined to one that precedes it.
      const auto& added = ast.tables[i + 1];
      auto is_added = [&](const ColumnRef& c) { return c.table == added.name; };
      if (is_added(j.left_col) == is_added(j.right_col))
        unsupported("join condition must link " + added.name + " to an earlier table");
    }
    for (auto& p : ast.where_conjuncts) resolve_ref(p.column);
    if (ast.group_by) resolve_ref(ast.group_by->key);
    if (ast.order_by) resolve_expr(ast.order_by->expr);
  }

  // Fills the summary fields (column/aggregate/derived) and enforces the
  // structural rules of the dialect.
  void classify(SqlAst& ast) {
    std::vector<Expr> aggregates;
    auto note_aggregate = [&](const Expr& e) {
      for (const auto& seen : aggregates) {
        bool same = seen.aggregate == e.aggregate && seen.args.size() == e.args.size() &&
                    (e.args.empty() || (seen.args[0].kind == Expr::Kind::column &&
                                        e.args[0].kind == Expr::Kind::column &&
                                        seen.args[0].column == e.args[0].column));
        if (same) return;
      }
      aggregates.push_back(e);
      if (aggregates.size() > 1) unsupported("multiple aggregate expressions");
    };

    bool any_plain = false;
    bool any_aggregate = false;
    for (auto& p : ast.select_items) {
      const Expr& e = p.expr;
      if (e.kind == Expr::Kind::column) {
        p.column = e.column;
        any_plain = true;
      } else if (e.kind == Expr::Kind::aggregate) {
        p.aggregate = e.aggregate;
        any_aggregate = true;
        if (!e.args.empty()) {
          p.column = e.args[0].first_column();
          if (e.args[0].kind != Expr::Kind::column) p.derived = true;
        }
        note_aggregate(e);
      } else {
        if (e.contains_aggregate()) unsupported("aggregate inside an expression");
        p.column = e.first_column();
        p.derived = true;
        any_plain = true;
      }
    }
    if (any_plain && any_aggregate && !ast.group_by) {
      unsupported("mixed aggregate and plain projections");
    }

    if (ast.order_by) {
      auto& o = *ast.order_by;
      const Expr* e = &o.expr;
      if (e->kind == Expr::Kind::cast && e->args[0].kind == Expr::Kind::column) e = &e->args[0];
      if (e->kind == Expr::Kind::column) {
        o.key = e->column;
      } else if (e->kind == Expr::Kind::aggregate) {
        o.aggregate = e->aggregate;
        if (!e->args.empty()) {
          o.key = e->args[0].first_column();
          if (e->args[0].kind != Expr::Kind::column) o.derived = true;
        }
        note_aggregate(*e);
      } else if (e->kind == Expr::Kind::substring) {
        o.key = e->args[0].column;
        o.transform = e->substring;
      } else {
        if (e->contains_aggregate()) unsupported("aggregate inside an expression");
        o.key = e->first_column();
        o.derived = true;
      }
    }

    if (ast.group_by) {
      auto& g = *ast.group_by;
      for (const auto& p : ast.select_items) {
        if (!p.aggregate && !(p.column && *p.column == g.key && !p.derived))
          unsupported("projection not in GROUP BY");
      }
      if (!aggregates.empty()) {
        g.aggregation = aggregates[0].aggregate;
        if (!aggregates[0].args.empty()) g.target = aggregates[0].args[0].first_column();
      }
    } else if (ast.order_by && ast.order_by->aggregate) {
      unsupported("aggregate ORDER BY without GROUP BY");
    }
  }
};

}  // namespace

SqlAst parse_sql(std::string_view text) { return Parser(text).parse(); }

}  // namespace toolbench::sql
