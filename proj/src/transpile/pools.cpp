#include "toolbench/transpile/pools.hpp"

#include "toolbench/sql/ast.hpp"

namespace toolbench::transpile {

using runtime::ParamSpec;
using runtime::ToolPool;
using runtime::ToolSpec;

namespace {

ParamSpec data_source_param() {
  return {"data_source", "string", "Location of the input data, given as a $LABEL$ reference.",
          std::nullopt, true, false, {}, std::nullopt};
}

ParamSpec key_param(const std::string& name, const std::string& purpose,
                    const std::vector<runtime::ColumnDescriptor>& columns, bool required = true) {
  std::string desc = "name of the key " + purpose + ":";
  std::vector<std::string> names;
  for (const auto& c : columns) {
    desc += "\n* `" + c.prefixed_name + "` - " + c.description;
    names.push_back(c.prefixed_name);
  }
  return {name, "string", desc, std::nullopt, required, true, names, std::nullopt};
}

ParamSpec enum_param(const std::string& name, const std::string& desc,
                     std::vector<std::string> values) {
  return {name, "string", desc, std::nullopt, true, false, std::move(values), std::nullopt};
}

ParamSpec plain_param(const std::string& name, const std::string& type, const std::string& desc,
                      bool required = true) {
  return {name, type, desc, std::nullopt, required, false, {}, std::nullopt};
}

std::vector<std::string> condition_names() {
  std::vector<std::string> out;
  for (auto c : sql::kAllConditions) out.emplace_back(sql::to_string(c));
  return out;
}

std::vector<std::string> aggregate_names() {
  std::vector<std::string> out;
  for (auto a : sql::kAllAggregates) out.emplace_back(sql::to_string(a));
  return out;
}

const std::pair<std::string, std::string> kTableOutput{
    "output_0", "Path of the CSV file holding the resulting table"};

ToolSpec table_tool(std::string name, std::string description, std::vector<ParamSpec> params) {
  ToolSpec t;
  t.name = std::move(name);
  t.description = std::move(description);
  t.parameters = std::move(params);
  t.outputs = {kTableOutput};
  t.output_type = "string";
  return t;
}

ToolSpec values_tool(std::string name, std::string description, std::vector<ParamSpec> params,
                     std::string output_description) {
  ToolSpec t;
  t.name = std::move(name);
  t.description = std::move(description);
  t.parameters = std::move(params);
  t.outputs = {{"output_0", std::move(output_description)}};
  t.output_type = "array";
  return t;
}

}  // namespace

ToolPool slot_pool(const std::vector<runtime::ColumnDescriptor>& columns) {
  ToolPool pool;
  pool.formulation = runtime::Formulation::slot;
  pool.column_enum = columns;

  pool.tools.push_back(table_tool(
      "aggregate_data",
      "Reduce a table to a single value by applying an aggregation to the column 'key_name'. "
      "The count operation counts rows and does not need a key.",
      {data_source_param(), key_param("key_name", "to aggregate", columns, false),
       enum_param("operation", "aggregation to apply", aggregate_names())}));
  pool.tools.push_back(table_tool(
      "filter_data",
      "Keep the rows of a table whose value in column 'key_name' satisfies the condition "
      "against 'value'. Rows keep their original order.",
      {data_source_param(), key_param("key_name", "to filter on", columns),
       plain_param("value", "any", "value to compare against"),
       enum_param("condition", "comparison between the cell and the value", condition_names())}));
  pool.tools.push_back(table_tool(
      "group_data_by",
      "Group the rows of a table by the values of column 'key_name' and aggregate each group. "
      "The result has one row per group with the key and the aggregated value.",
      {data_source_param(), key_param("key_name", "to group by", columns),
       enum_param("aggregation", "aggregation applied to each group", aggregate_names()),
       key_param("target_key", "to aggregate within each group", columns, false)}));
  pool.tools.push_back(values_tool(
      "retrieve_data",
      "Return the values of column 'key_name' as a list, optionally keeping only distinct "
      "values and truncating to the first 'limit' entries.",
      {data_source_param(), key_param("key_name", "to retrieve", columns),
       plain_param("distinct", "boolean", "only return distinct values", false),
       plain_param("limit", "integer", "maximum number of values to return, -1 for all", false)},
      "List of values from the chosen column"));
  pool.tools.push_back(values_tool(
      "select_unique_values",
      "Return the distinct values of column 'key_name' in order of first appearance.",
      {data_source_param(), key_param("key_name", "to read unique values from", columns)},
      "List of distinct values from the chosen column"));
  pool.tools.push_back(table_tool(
      "sort_data",
      "Sort the rows of a table by the values in column 'key_name'. Ties keep their input order "
      "and empty cells go last.",
      {data_source_param(), key_param("key_name", "to sort by", columns),
       plain_param("ascending", "boolean", "whether to sort in ascending order")}));
  pool.tools.push_back(table_tool(
      "transform_data",
      "Rewrite the values of column 'key_name' in place. The substring operation keeps the "
      "characters from start_index (inclusive) to end_index (exclusive), counting from 0.",
      {data_source_param(), key_param("key_name", "to transform", columns),
       enum_param("operation_type", "transformation to apply", {"substring"}),
       plain_param("operation_args", "object",
                   "arguments of the transformation, e.g. {\"start_index\": 0, \"end_index\": 4}")}));
  return pool;
}

std::string getter_name(const std::string& key_name) { return "get_" + key_name; }

namespace {

ToolSpec getter(const std::string& key, const std::string& description) {
  ToolSpec t = values_tool(getter_name(key), "Return the values of column " + key + " (" +
                                                 description + ") as a list.",
                           {data_source_param()}, "List of values from " + key);
  t.base_tool = "retrieve_data";
  t.bound_args = Json{{"key_name", key}, {"distinct", false}, {"limit", -1}};
  return t;
}

std::string variant_suffix(const ParamSpec& p, const Json& value) {
  if (value.is_boolean()) {
    if (p.name == "ascending") return value.get<bool>() ? "ascending" : "descending";
    return p.name + (value.get<bool>() ? "_true" : "_false");
  }
  return value.get<std::string>();
}

}  // namespace

ToolPool derive_sel_pool(const ToolPool& slot) {
  ToolPool pool;
  pool.formulation = runtime::Formulation::sel;
  pool.column_enum = slot.column_enum;

  for (const auto& tool : slot.tools) {
    if (tool.name == "retrieve_data") {
      for (const auto& c : slot.column_enum) pool.tools.push_back(getter(c.prefixed_name, c.description));
      continue;
    }
    const ParamSpec* categorical = nullptr;
    for (const auto& p : tool.parameters) {
      if ((!p.enum_values.empty() && !p.column_valued) || (p.type == "boolean" && p.required)) {
        categorical = &p;
        break;
      }
    }
    if (!categorical) {
      pool.tools.push_back(tool);
      continue;
    }
    std::vector<Json> values;
    if (categorical->type == "boolean") {
      values = {true, false};
    } else {
      for (const auto& v : categorical->enum_values) values.emplace_back(v);
    }
    const std::string stem = tool.name == "filter_data" ? "select_data" : tool.name;
    for (const auto& v : values) {
      ToolSpec t = tool;
      t.name = stem + "_" + variant_suffix(*categorical, v);
      t.base_tool = tool.base_tool.empty() ? tool.name : tool.base_tool;
      t.bound_args[categorical->name] = v;
      std::erase_if(t.parameters, [&](const ParamSpec& p) { return p.name == categorical->name; });
      pool.tools.push_back(std::move(t));
    }
  }

  pool.tools.push_back(values_tool("distinct_values",
                                   "Remove repeated entries from a list of values, keeping the "
                                   "first occurrence of each.",
                                   {data_source_param()}, "List of distinct values"));
  pool.tools.push_back(values_tool(
      "limit_values", "Keep only the first 'limit' entries of a list of values.",
      {data_source_param(), plain_param("limit", "integer", "number of values to keep")},
      "Truncated list of values"));
  return pool;
}

void add_getters(ToolPool& sel, const std::vector<std::string>& key_names) {
  for (const auto& k : key_names) {
    if (sel.find(getter_name(k))) continue;
    // Keep helpers last so the generic part of the pool reads the same.
    auto pos = sel.tools.end();
    while (pos != sel.tools.begin() &&
           ((pos - 1)->name == "distinct_values" || (pos - 1)->name == "limit_values")) {
      --pos;
    }
    sel.tools.insert(pos, getter(k, "computed column"));
  }
}

ToolPool rest_pool(const std::vector<rest::RestEndpoint>& endpoints) {
  ToolPool pool;
  pool.formulation = runtime::Formulation::rest;
  for (const auto& e : endpoints) {
    ToolSpec t;
    t.name = e.name;
    t.description = e.description;
    t.path = e.path;
    t.base_tool = std::string(runtime::kRestBaseTool);
    t.bound_args = Json{{"endpoint", e.name}};
    t.outputs = {{e.resource, "Values returned by the endpoint"}};
    t.output_type = "object";
    for (const auto& p : e.params) {
      t.parameters.push_back({p.name, p.type, p.description, p.title, true, false, {}, std::nullopt});
    }
    pool.tools.push_back(std::move(t));
    pool.endpoints.emplace(e.name, e);
  }
  return pool;
}

}  // namespace toolbench::transpile
