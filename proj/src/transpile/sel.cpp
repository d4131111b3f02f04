#include "toolbench/transpile/sel.hpp"

#include "toolbench/transpile/pools.hpp"
#include "toolbench/util/error.hpp"

namespace toolbench::transpile {

namespace {

using runtime::ToolCall;

ToolCall moved(const ToolCall& c, const std::string& name, const char* categorical) {
  ToolCall out = c;
  out.name = name;
  out.arguments.erase(categorical);
  return out;
}

std::string str(const ToolCall& c, const char* key) {
  auto it = c.arguments.find(key);
  if (it == c.arguments.end() || !it->is_string()) {
    throw Error(ErrorCode::bad_argument, c.name + " call lacks " + key);
  }
  return it->get<std::string>();
}

}  // namespace

std::vector<ToolCall> rewrite_to_sel_sequence(const std::vector<ToolCall>& slot_calls) {
  std::vector<ToolCall> out;
  for (const auto& c : slot_calls) {
    if (c.name == "filter_data") {
      out.push_back(moved(c, "select_data_" + str(c, "condition"), "condition"));
    } else if (c.name == "sort_data") {
      const bool asc = c.arguments.value("ascending", true);
      out.push_back(moved(c, asc ? "sort_data_ascending" : "sort_data_descending", "ascending"));
    } else if (c.name == "group_data_by") {
      out.push_back(moved(c, "group_data_by_" + str(c, "aggregation"), "aggregation"));
    } else if (c.name == "aggregate_data") {
      out.push_back(moved(c, "aggregate_data_" + str(c, "operation"), "operation"));
    } else if (c.name == "transform_data") {
      out.push_back(moved(c, "transform_data_" + str(c, "operation_type"), "operation_type"));
    } else if (c.name == "retrieve_data") {
      const bool distinct = c.arguments.value("distinct", false);
      const std::int64_t limit = c.arguments.value("limit", std::int64_t{-1});
      ToolCall get;
      get.name = getter_name(str(c, "key_name"));
      get.arguments["data_source"] = c.arguments.at("data_source");
      get.label = (distinct || limit != -1) ? c.label + "_VALUES" : c.label;
      std::string last = get.label;
      out.push_back(std::move(get));
      if (distinct) {
        ToolCall d;
        d.name = "distinct_values";
        d.arguments["data_source"] = "$" + last + "$";
        d.label = limit != -1 ? c.label + "_DISTINCT" : c.label;
        last = d.label;
        out.push_back(std::move(d));
      }
      if (limit != -1) {
        ToolCall l;
        l.name = "limit_values";
        l.arguments["data_source"] = "$" + last + "$";
        l.arguments["limit"] = limit;
        l.label = c.label;
        out.push_back(std::move(l));
      }
    } else {
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace toolbench::transpile
