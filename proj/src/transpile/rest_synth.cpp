#include "toolbench/transpile/rest_synth.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "toolbench/sql/render.hpp"
#include "toolbench/util/strings.hpp"

namespace toolbench::transpile {

namespace {

std::string words(const std::string& snake) {
  std::string out = snake;
  util::replace_all(out, "_", " ");
  return out;
}

std::string column_description(const Catalog* catalog, const sql::ColumnRef& c) {
  if (catalog) {
    for (const auto& col : catalog->columns) {
      if (col.table == c.table && col.column == c.column) return col.description;
    }
  }
  return util::title_case(util::snake_case(c.column));
}

std::string param_description(const std::string& base, sql::ConditionKind cond) {
  using sql::ConditionKind;
  switch (cond) {
    case ConditionKind::equal_to: return base;
    case ConditionKind::not_equal_to: return "Value of " + base + " to exclude";
    case ConditionKind::greater_than: return "Lower bound (exclusive) for " + base;
    case ConditionKind::less_than: return "Upper bound (exclusive) for " + base;
    case ConditionKind::greater_than_equal_to: return "Lower bound (inclusive) for " + base;
    case ConditionKind::less_than_equal_to: return "Upper bound (inclusive) for " + base;
    case ConditionKind::contains: return "Text contained in " + base;
    case ConditionKind::like: return "LIKE pattern for " + base;
  }
  return base;
}

std::string projection_resource(const sql::Projection& p, const sql::SqlAst& ast) {
  if (p.aggregate) {
    const std::string agg(sql::to_string(*p.aggregate));
    if (!p.column) return agg + "_" + util::snake_case(ast.tables.front().name);
    return agg + "_" + util::snake_case(p.column->column);
  }
  const std::string base = p.column ? util::snake_case(p.column->column) : "value";
  if (p.expr.kind == sql::Expr::Kind::binary && p.expr.op == '/') return base + "_ratio";
  return base;
}

std::string join_phrase(const std::vector<std::string>& items) {
  if (items.empty()) return {};
  if (items.size() == 1) return items[0];
  std::vector<std::string> head(items.begin(), items.end() - 1);
  return util::join(head, ", ") + " and " + items.back();
}

void set_resource(rest::RestEndpoint& e, const std::string& resource) {
  e.resource = resource;
  e.name = rest::endpoint_name(e.db, resource);
  e.path = rest::endpoint_path(e.db, resource);
}

}  // namespace

SynthesizedEndpoint synthesize_rest_endpoint(const sql::SqlAst& ast,
                                             [[maybe_unused]] const std::string& nl_input,
                                             const std::string& db, const Catalog* catalog) {
  SynthesizedEndpoint out;
  auto& e = out.endpoint;
  e.db = db;
  e.sql_template = sql::render_sql(ast, {.placeholders = true});
  out.arguments = Json::object();

  std::set<std::string> taken;
  std::vector<std::string> titles;
  for (const auto& lit : sql::extract_literals(ast)) {
    std::string name = util::snake_case(lit.column.column);
    if (name.empty()) name = "value";
    if (taken.count(name)) name += "_" + std::string(sql::to_string(lit.condition));
    for (int n = 2; taken.count(name); ++n) name += "_" + std::to_string(n);
    taken.insert(name);

    rest::EndpointParam p;
    p.name = name;
    p.type = lit.value.kind == sql::Literal::Kind::integer ? "integer"
             : lit.value.kind == sql::Literal::Kind::real  ? "number"
                                                           : "string";
    p.title = util::title_case(name);
    std::string base = column_description(catalog, lit.column);
    if (lit.transformed) base += " (leading characters)";
    p.description = param_description(base, lit.condition);
    e.params.push_back(p);
    titles.push_back(util::to_lower(p.title));

    if (p.type == "integer") {
      out.arguments[name] = util::parse_integer(lit.value.text).value_or(
          static_cast<std::int64_t>(lit.value.number));
    } else if (p.type == "number") {
      out.arguments[name] = lit.value.number;
    } else {
      out.arguments[name] = lit.value.text;
    }
  }

  std::vector<std::string> parts;
  for (const auto& p : ast.select_items) {
    auto r = projection_resource(p, ast);
    if (std::find(parts.begin(), parts.end(), r) == parts.end()) parts.push_back(r);
  }
  set_resource(e, util::join(parts, "_"));

  std::string desc = "Get " + words(e.resource);
  if (!titles.empty()) desc += " for a given " + join_phrase(titles);
  if (ast.order_by && ast.limit && ast.order_by->key) {
    desc += std::string(titles.empty() ? " for" : ", for") +
            (ast.order_by->ascending ? " the lowest " : " the highest ") +
            (ast.order_by->aggregate ? std::string(sql::to_string(*ast.order_by->aggregate)) + " " : "") +
            words(util::snake_case(ast.order_by->key->column));
  }
  e.description = desc;
  return out;
}

DedupResult deduplicate_endpoints(const std::vector<rest::RestEndpoint>& endpoints) {
  DedupResult out;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (const auto& e : endpoints) {
    auto key = std::make_pair(e.db, e.sql_template);
    auto it = index.find(key);
    if (it == index.end()) {
      index.emplace(key, out.endpoints.size());
      out.instance_endpoint.push_back(out.endpoints.size());
      out.endpoints.push_back(e);
    } else {
      auto& survivor = out.endpoints[it->second];
      if (e.name < survivor.name) {
        survivor.name = e.name;
        survivor.resource = e.resource;
        survivor.path = e.path;
        survivor.description = e.description;
      }
      out.instance_endpoint.push_back(it->second);
    }
  }
  return out;
}

void disambiguate_names(std::vector<rest::RestEndpoint>& endpoints) {
  std::set<std::pair<std::string, std::string>> taken;
  for (auto& e : endpoints) {
    std::string resource = e.resource;
    if (taken.count({e.db, resource})) {
      std::string extended = resource;
      for (const auto& p : e.params) extended += "_" + p.name;
      resource = extended;
      for (int n = 2; taken.count({e.db, resource}); ++n) resource = extended + "_" + std::to_string(n);
      set_resource(e, resource);
    }
    taken.insert({e.db, resource});
  }
}

}  // namespace toolbench::transpile
