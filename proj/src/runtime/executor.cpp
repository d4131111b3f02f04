#include "toolbench/runtime/executor.hpp"

#include <cmath>
#include <set>

#include "toolbench/runtime/tools.hpp"
#include "toolbench/util/strings.hpp"

namespace toolbench::runtime {

Json ToolResult::to_answer() const {
  if (kind == Kind::values) return values;
  return read_csv(table.path).rows_json();
}

LabelEnv::LabelEnv(std::filesystem::path workdir, std::filesystem::path database_root)
    : workdir_(std::move(workdir)), database_root_(std::move(database_root)) {
  std::filesystem::create_directories(workdir_);
}

const ToolResult& LabelEnv::get(const std::string& label) const {
  auto it = bindings_.find(label);
  if (it == bindings_.end()) {
    throw Error(ErrorCode::unresolved_reference, "unresolved reference: $" + label + "$");
  }
  return it->second;
}

void LabelEnv::bind(const std::string& label, ToolResult result) {
  if (!bindings_.emplace(label, std::move(result)).second) {
    throw Error(ErrorCode::bad_argument, "duplicate label: " + label);
  }
}

const Table& LabelEnv::load(const TableHandle& handle) {
  const auto key = handle.path.string();
  auto it = table_cache_.find(key);
  if (it == table_cache_.end()) it = table_cache_.emplace(key, read_csv(handle.path)).first;
  return it->second;
}

TableHandle LabelEnv::store(const std::string& label, const Table& table) {
  std::string stem;
  for (char c : label) {
    const bool safe = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                      c == '_' || c == '-' || c == '.';
    stem += safe ? c : '_';
  }
  if (stem.empty() || stem.front() == '.') stem = "_" + stem;
  auto path = workdir_ / (stem + ".csv");
  for (int n = 1; table_cache_.count(path.string()) || std::filesystem::exists(path); ++n) {
    path = workdir_ / (stem + "_" + std::to_string(n) + ".csv");
  }
  write_csv(path, table);
  table_cache_[path.string()] = table;
  return TableHandle{path, table.columns, table.rows.size()};
}

const Database& LabelEnv::database(const std::filesystem::path& path) {
  const auto key = path.string();
  auto it = databases_.find(key);
  if (it == databases_.end()) {
    it = databases_.emplace(key, std::make_unique<Database>(path, Database::Mode::read_only)).first;
  }
  return *it->second;
}

namespace {

std::filesystem::path resolve_database(const LabelEnv& env, const std::string& raw) {
  std::filesystem::path p(raw);
  if (p.is_absolute() && std::filesystem::exists(p)) return p;
  auto joined = env.database_root() / p;
  if (std::filesystem::exists(joined)) return joined;
  return env.database_root() / p.filename();
}

const Json& require(const Json& args, const std::string& key) {
  auto it = args.find(key);
  if (it == args.end() || it->is_null()) {
    throw Error(ErrorCode::bad_argument, "missing required parameter: " + key);
  }
  return *it;
}

std::string string_arg(const Json& args, const std::string& key) {
  const Json& v = require(args, key);
  if (!v.is_string()) throw Error(ErrorCode::bad_argument, key + " must be a string");
  return v.get<std::string>();
}

std::optional<std::string> optional_string(const Json& args, const std::string& key) {
  auto it = args.find(key);
  if (it == args.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw Error(ErrorCode::bad_argument, key + " must be a string");
  return it->get<std::string>();
}

bool bool_arg(const Json& args, const std::string& key, std::optional<bool> fallback = {}) {
  auto it = args.find(key);
  if (it == args.end() || it->is_null()) {
    if (fallback) return *fallback;
    throw Error(ErrorCode::bad_argument, "missing required parameter: " + key);
  }
  if (it->is_boolean()) return it->get<bool>();
  if (it->is_number_integer()) return it->get<std::int64_t>() != 0;
  if (it->is_string()) {
    const auto s = util::to_lower(it->get<std::string>());
    if (s == "true") return true;
    if (s == "false") return false;
  }
  throw Error(ErrorCode::bad_argument, key + " must be a boolean");
}

std::int64_t int_arg(const Json& args, const std::string& key, std::optional<std::int64_t> fallback) {
  auto it = args.find(key);
  if (it == args.end() || it->is_null()) {
    if (fallback) return *fallback;
    throw Error(ErrorCode::bad_argument, "missing required parameter: " + key);
  }
  if (it->is_number_integer()) return it->get<std::int64_t>();
  if (it->is_number_float()) {
    const double d = it->get<double>();
    if (std::floor(d) == d) return static_cast<std::int64_t>(d);
  }
  if (it->is_string()) {
    if (auto iv = util::parse_integer(it->get<std::string>())) return *iv;
  }
  throw Error(ErrorCode::bad_argument, key + " must be an integer");
}

sql::ConditionKind condition_arg(const Json& args) {
  const auto name = string_arg(args, "condition");
  auto c = sql::parse_condition(name);
  if (!c) throw Error(ErrorCode::unknown_condition, "unknown condition: " + name);
  return *c;
}

sql::Aggregate aggregate_arg(const Json& args, const std::string& key) {
  const auto name = string_arg(args, key);
  auto a = sql::parse_aggregate(util::to_lower(name));
  if (!a) throw Error(ErrorCode::unknown_operation, "unknown aggregation: " + name);
  return *a;
}

std::string source_label(const Json& args, const LabelEnv& env) {
  const Json& v = require(args, "data_source");
  if (!v.is_string()) throw Error(ErrorCode::bad_argument, "data_source must be a string");
  auto label = referenced_label(v);
  if (label.empty()) {
    label = v.get<std::string>();
    if (!env.has(label)) {
      throw Error(ErrorCode::unresolved_reference, "data_source is not a $LABEL$ reference: " + label);
    }
  }
  return label;
}

const Table& source_table(const Json& args, LabelEnv& env) {
  const auto label = source_label(args, env);
  const ToolResult& r = env.get(label);
  if (r.kind != ToolResult::Kind::table) {
    throw Error(ErrorCode::bad_argument, "$" + label + "$ holds values, not a table");
  }
  return env.load(r.table);
}

const Json& source_values(const Json& args, LabelEnv& env) {
  const auto label = source_label(args, env);
  const ToolResult& r = env.get(label);
  if (r.kind != ToolResult::Kind::values) {
    throw Error(ErrorCode::bad_argument, "$" + label + "$ holds a table, not values");
  }
  return r.values;
}

ToolResult table_result(LabelEnv& env, const std::string& label, const Table& t) {
  ToolResult r;
  r.kind = ToolResult::Kind::table;
  r.table = env.store(label, t);
  return r;
}

ToolResult values_result(Json v) {
  ToolResult r;
  r.kind = ToolResult::Kind::values;
  r.values = std::move(v);
  return r;
}

ToolResult invoke_base(const std::string& base, const Json& args, const std::string& label,
                       LabelEnv& env, const ToolPool& pool) {
  if (base == "filter_data") {
    const Table& t = source_table(args, env);
    return table_result(env, label,
                        tools::filter_data(t, string_arg(args, "key_name"), require(args, "value"),
                                           condition_arg(args)));
  }
  if (base == "sort_data") {
    const Table& t = source_table(args, env);
    return table_result(env, label,
                        tools::sort_data(t, string_arg(args, "key_name"), bool_arg(args, "ascending")));
  }
  if (base == "group_data_by") {
    const Table& t = source_table(args, env);
    const auto agg = aggregate_arg(args, "aggregation");
    auto target = optional_string(args, "target_key");
    if (!target && agg != sql::Aggregate::count) {
      throw Error(ErrorCode::bad_argument, "missing required parameter: target_key");
    }
    return table_result(env, label,
                        tools::group_data_by(t, string_arg(args, "key_name"), agg, target));
  }
  if (base == "aggregate_data") {
    const Table& t = source_table(args, env);
    const auto op = aggregate_arg(args, "operation");
    auto key = optional_string(args, "key_name");
    if (!key && op != sql::Aggregate::count) {
      throw Error(ErrorCode::bad_argument, "missing required parameter: key_name");
    }
    return table_result(env, label, tools::aggregate_data(t, key, op));
  }
  if (base == "retrieve_data") {
    const Table& t = source_table(args, env);
    return values_result(tools::retrieve_data(t, string_arg(args, "key_name"),
                                              bool_arg(args, "distinct", false),
                                              int_arg(args, "limit", -1)));
  }
  if (base == "select_unique_values") {
    const Table& t = source_table(args, env);
    return values_result(tools::select_unique_values(t, string_arg(args, "key_name")));
  }
  if (base == "transform_data") {
    const Table& t = source_table(args, env);
    return table_result(env, label,
                        tools::transform_data(t, string_arg(args, "key_name"),
                                              string_arg(args, "operation_type"),
                                              require(args, "operation_args")));
  }
  if (base == "distinct_values") {
    return values_result(tools::distinct_values(source_values(args, env)));
  }
  if (base == "limit_values") {
    return values_result(tools::limit_values(source_values(args, env), int_arg(args, "limit", {})));
  }
  if (base == kRestBaseTool) {
    const auto name = string_arg(args, "endpoint");
    auto it = pool.endpoints.find(name);
    if (it == pool.endpoints.end()) {
      throw Error(ErrorCode::tool_not_in_pool, "unknown endpoint: " + name);
    }
    Json call_args = args;
    call_args.erase("endpoint");
    const auto& db = env.database(env.database_root() / (it->second.db + ".sqlite"));
    return values_result(rest::execute_endpoint(it->second, call_args, db));
  }
  throw Error(ErrorCode::tool_not_in_pool, "no implementation for tool: " + base);
}

}  // namespace

TableHandle run_initialization(const ToolCall& init, LabelEnv& env) {
  if (init.name != tools::kInitializeTool) {
    throw Error(ErrorCode::bad_argument, "initialization step must call " +
                                             std::string(tools::kInitializeTool));
  }
  const auto& args = init.arguments;
  const auto path = resolve_database(env, string_arg(args, "database_path"));
  const auto& db = env.database(path);
  const Table t = tools::initialize_active_data(args.value("condition_sequence", Json::array()),
                                                require(args, "alias_to_table_dict"), db);
  const std::string label = init.label.empty() ? std::string(tools::kStartingLabel) : init.label;
  ToolResult r = table_result(env, label, t);
  env.bind(label, r);
  return r.table;
}

ToolResult invoke_tool(const ToolCall& call, LabelEnv& env, const ToolPool& pool) {
  const ToolSpec* spec = pool.find(call.name);
  if (!spec) throw Error(ErrorCode::tool_not_in_pool, "tool not in pool: " + call.name);
  if (!call.arguments.is_object()) throw Error(ErrorCode::bad_argument, "arguments must be an object");

  Json args = spec->bound_args.is_object() ? spec->bound_args : Json::object();
  for (const auto& [key, value] : call.arguments.items()) {
    if (!spec->find_param(key)) {
      throw Error(ErrorCode::bad_argument, "unexpected parameter for " + call.name + ": " + key);
    }
    auto m = spec->arg_map.find(key);
    args[m == spec->arg_map.end() ? key : m->second] = value;
  }
  for (const auto& p : spec->parameters) {
    if (p.required && (!call.arguments.contains(p.name) || call.arguments.at(p.name).is_null())) {
      const ErrorCode code =
          spec->base_tool == kRestBaseTool ? ErrorCode::missing_param : ErrorCode::bad_argument;
      throw Error(code, "missing required parameter: " + p.name);
    }
  }
  if (env.has(call.label)) throw Error(ErrorCode::bad_argument, "duplicate label: " + call.label);
  ToolResult r = invoke_base(spec->base_tool.empty() ? spec->name : spec->base_tool, args,
                             call.label, env, pool);
  env.bind(call.label, r);
  return r;
}

ExecutionResult execute_sequence(const std::vector<ToolCall>& input, LabelEnv& env,
                                 const ToolPool& pool) {
  ExecutionResult result;
  if (input.empty()) {
    result.error_code = ErrorCode::no_final_result;
    result.error_message = "empty sequence";
    return result;
  }
  std::vector<ToolCall> calls = input;
  std::set<std::string> used;
  for (const auto& c : calls) {
    if (!c.label.empty()) used.insert(c.label);
  }
  for (std::size_t i = 0; i < calls.size(); ++i) {
    if (!calls[i].label.empty()) continue;
    std::string l = "OUTPUT_" + std::to_string(i);
    while (used.count(l)) l += "_";
    used.insert(l);
    calls[i].label = l;
  }

  // A call is a sink when no later call consumes its label.
  std::vector<bool> sink(calls.size(), true);
  for (std::size_t i = 0; i < calls.size(); ++i) {
    for (const auto& [key, value] : calls[i].arguments.items()) {
      std::string ref = referenced_label(value);
      if (ref.empty() && key == "data_source" && value.is_string()) ref = value.get<std::string>();
      for (std::size_t j = 0; j < i; ++j) {
        if (calls[j].label == ref) sink[j] = false;
      }
    }
  }

  std::vector<ToolResult> outputs;
  for (std::size_t i = 0; i < calls.size(); ++i) {
    StepTrace step{i, calls[i].name, calls[i].label, false, {}, {}};
    try {
      outputs.push_back(invoke_tool(calls[i], env, pool));
      step.ok = true;
      result.trace.push_back(step);
    } catch (const Error& e) {
      step.error_code = std::string(to_string(e.code()));
      step.error_message = e.what();
      result.trace.push_back(step);
      result.failed_step = i;
      result.error_code = e.code();
      result.error_message = e.what();
      return result;
    } catch (const std::exception& e) {
      step.error_code = std::string(to_string(ErrorCode::execution_error));
      step.error_message = e.what();
      result.trace.push_back(step);
      result.failed_step = i;
      result.error_code = ErrorCode::execution_error;
      result.error_message = e.what();
      return result;
    }
  }

  Json sinks = Json::array();
  for (std::size_t i = 0; i < calls.size(); ++i) {
    if (sink[i]) sinks.push_back(outputs[i].to_answer());
  }
  result.answer = sinks.size() == 1 ? sinks[0] : sinks;
  result.final_result = outputs.back();
  result.ok = true;
  return result;
}

}  // namespace toolbench::runtime
