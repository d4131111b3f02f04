#include "toolbench/transpile/slot.hpp"

#include <algorithm>
#include <map>

#include "toolbench/runtime/tools.hpp"
#include "toolbench/util/error.hpp"

namespace toolbench::transpile {

namespace {

[[noreturn]] void unsupported(const std::string& what) {
  throw Error(ErrorCode::unsupported_construct, "cannot compile to tool calls: " + what);
}

std::string label_ref(const std::string& label) { return "$" + label + "$"; }

class Compiler {
 public:
  Compiler(const sql::SqlAst& ast, std::string db) : ast_(ast), db_(std::move(db)) {}

  SlotProgram run() {
    check_transforms();
    SlotProgram prog;
    prog.initialization = initialization();
    current_ = std::string(runtime::tools::kStartingLabel);

    for (const auto& p : ast_.where_conjuncts) {
      if (p.transform) transform(p.column, *p.transform);
      Json args = Json::object();
      args["data_source"] = label_ref(current_);
      args["key_name"] = p.column.prefixed_name();
      args["value"] = p.value.to_tool_value();
      args["condition"] = std::string(sql::to_string(p.condition));
      emit("filter_data", std::move(args), "FILTERED_DF_");
    }

    std::optional<std::string> aggregate_column;
    if (ast_.group_by) {
      const auto& g = *ast_.group_by;
      const auto agg = g.aggregation.value_or(sql::Aggregate::count);
      Json args = Json::object();
      args["data_source"] = label_ref(current_);
      args["key_name"] = g.key.prefixed_name();
      args["aggregation"] = std::string(sql::to_string(agg));
      std::optional<std::string> target;
      if (g.target) {
        target = g.target->prefixed_name();
        args["target_key"] = *target;
      }
      emit("group_data_by", std::move(args), "GROUPED_DF_");
      aggregate_column = runtime::tools::aggregate_column_name(agg, target);
    }

    if (ast_.order_by) {
      const auto& o = *ast_.order_by;
      if (o.derived) unsupported("computed ORDER BY expression");
      std::string key;
      if (o.aggregate) {
        if (!aggregate_column) unsupported("aggregate ORDER BY without GROUP BY");
        key = *aggregate_column;
      } else {
        if (!o.key) unsupported("ORDER BY without a column");
        if (ast_.group_by && !(*o.key == ast_.group_by->key)) {
          unsupported("ORDER BY a column that is not the GROUP BY key");
        }
        if (o.transform) {
          if (ast_.group_by) unsupported("SUBSTR ORDER BY on grouped data");
          if (!transformed(*o.key, *o.transform)) transform(*o.key, *o.transform);
        }
        key = o.key->prefixed_name();
      }
      Json args = Json::object();
      args["data_source"] = label_ref(current_);
      args["key_name"] = key;
      args["ascending"] = o.ascending;
      emit("sort_data", std::move(args), "SORTED_DF_");
    }

    const bool all_aggregates =
        std::all_of(ast_.select_items.begin(), ast_.select_items.end(),
                    [](const sql::Projection& p) { return p.aggregate.has_value(); });
    if (all_aggregates && !ast_.group_by) {
      if (ast_.order_by || ast_.limit || ast_.distinct) {
        unsupported("ORDER BY, LIMIT or DISTINCT on an ungrouped aggregate");
      }
      const auto& p = ast_.select_items.front();
      if (p.derived) unsupported("aggregate over a computed expression");
      Json args = Json::object();
      args["data_source"] = label_ref(current_);
      if (p.column) args["key_name"] = p.column->prefixed_name();
      args["operation"] = std::string(sql::to_string(*p.aggregate));
      emit("aggregate_data", std::move(args), "AGGREGATED_DF_");
      prog.calls = std::move(calls_);
      return prog;
    }

    if (ast_.distinct && ast_.select_items.size() > 1) {
      unsupported("DISTINCT over several columns");
    }
    if (ast_.limit && *ast_.limit < 1) unsupported("LIMIT below 1");
    std::size_t j = 0;
    for (const auto& p : ast_.select_items) {
      if (p.derived) unsupported("computed projection");
      std::string key;
      if (p.aggregate) {
        key = *aggregate_column;
      } else {
        key = p.column->prefixed_name();
        if (transformed_any(*p.column)) unsupported("projection of a transformed column");
      }
      ToolCall call;
      call.name = "retrieve_data";
      call.arguments["data_source"] = label_ref(current_);
      call.arguments["key_name"] = key;
      call.arguments["distinct"] = ast_.distinct;
      call.arguments["limit"] = ast_.limit.value_or(-1);
      call.label = "SELECT_COL_" + std::to_string(j++);
      calls_.push_back(std::move(call));
    }
    prog.calls = std::move(calls_);
    return prog;
  }

 private:
  using ToolCall = runtime::ToolCall;

  runtime::ToolCall initialization() const {
    ToolCall init;
    init.name = std::string(runtime::tools::kInitializeTool);
    Json seq = Json::array();
    for (const auto& j : ast_.joins) {
      seq.push_back(Json::array({j.left_col.alias + "." + j.left_col.column,
                                 j.right_col.alias + "." + j.right_col.column, "INNER"}));
    }
    Json aliases = Json::object();
    for (const auto& t : ast_.tables) {
      aliases[t.alias.empty() ? t.name : t.alias] =
          Json{{"original_table_name", t.name}, {"modified_table_name", t.name}};
    }
    init.arguments["condition_sequence"] = std::move(seq);
    init.arguments["alias_to_table_dict"] = std::move(aliases);
    init.arguments["database_path"] = db_ + ".sqlite";
    init.label = std::string(runtime::tools::kStartingLabel);
    return init;
  }

  void emit(const std::string& name, Json args, const std::string& prefix) {
    ToolCall call;
    call.name = name;
    call.arguments = std::move(args);
    call.label = prefix + std::to_string(k_++);
    current_ = call.label;
    calls_.push_back(std::move(call));
  }

  void transform(const sql::ColumnRef& column, const sql::Substring& s) {
    Json args = Json::object();
    args["data_source"] = label_ref(current_);
    args["key_name"] = column.prefixed_name();
    args["operation_type"] = "substring";
    args["operation_args"] = Json{{"start_index", s.start_index}, {"end_index", s.end_index}};
    emit("transform_data", std::move(args), "TRANSFORMED_DF_");
    applied_.emplace_back(column, s);
  }

  bool transformed(const sql::ColumnRef& c, const sql::Substring& s) const {
    return std::any_of(applied_.begin(), applied_.end(),
                       [&](const auto& a) { return a.first == c && a.second == s; });
  }

  bool transformed_any(const sql::ColumnRef& c) const {
    return std::any_of(applied_.begin(), applied_.end(),
                       [&](const auto& a) { return a.first == c; });
  }

  // A transform rewrites its column in place, so every use of that column
  // must agree on the same slice.
  void check_transforms() const {
    std::map<std::string, std::optional<sql::Substring>> uses;
    auto note = [&](const sql::ColumnRef& c, const std::optional<sql::Substring>& s) {
      const auto key = c.prefixed_name();
      auto [it, inserted] = uses.emplace(key, s);
      if (!inserted && it->second != s) unsupported("column " + key + " used with different slices");
    };
    for (const auto& p : ast_.where_conjuncts) note(p.column, p.transform);
    if (ast_.order_by && ast_.order_by->key && !ast_.order_by->aggregate) {
      note(*ast_.order_by->key, ast_.order_by->transform);
    }
    for (const auto& p : ast_.select_items) {
      if (p.column) note(*p.column, std::nullopt);
    }
    if (ast_.group_by) note(ast_.group_by->key, std::nullopt);
  }

  const sql::SqlAst& ast_;
  std::string db_;
  std::string current_;
  std::size_t k_ = 0;
  std::vector<ToolCall> calls_;
  std::vector<std::pair<sql::ColumnRef, sql::Substring>> applied_;
};

}  // namespace

SlotProgram compile_slot_sequence(const sql::SqlAst& ast, const std::string& db_name) {
  return Compiler(ast, db_name).run();
}

std::vector<std::string> derived_columns(const std::vector<runtime::ToolCall>& calls,
                                         const std::vector<std::string>& schema) {
  std::vector<std::string> out;
  for (const auto& c : calls) {
    for (const char* key : {"key_name", "target_key"}) {
      auto it = c.arguments.find(key);
      if (it == c.arguments.end() || !it->is_string()) continue;
      const auto name = it->get<std::string>();
      if (std::find(schema.begin(), schema.end(), name) == schema.end() &&
          std::find(out.begin(), out.end(), name) == out.end()) {
        out.push_back(name);
      }
    }
  }
  return out;
}

}  // namespace toolbench::transpile
