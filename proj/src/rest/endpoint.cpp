#include "toolbench/rest/endpoint.hpp"

#include <cmath>

#include "toolbench/util/error.hpp"
#include "toolbench/util/strings.hpp"

namespace toolbench::rest {

Json RestEndpoint::to_json() const {
  Json args = Json::object();
  for (const auto& p : params) {
    args[p.name] = Json{{"type", p.type}, {"description", p.description}, {"title", p.title}};
  }
  Json j = Json::object();
  j["name"] = name;
  j["description"] = description;
  j["db"] = db;
  j["resource"] = resource;
  j["path"] = path;
  j["method"] = "GET";
  j["arguments"] = std::move(args);
  j["sql_template"] = sql_template;
  return j;
}

RestEndpoint RestEndpoint::from_json(const Json& j) {
  try {
    RestEndpoint e;
    e.name = j.at("name").get<std::string>();
    e.description = j.value("description", "");
    e.db = j.at("db").get<std::string>();
    e.resource = j.at("resource").get<std::string>();
    e.path = j.at("path").get<std::string>();
    e.sql_template = j.at("sql_template").get<std::string>();
    const Json args = j.value("arguments", Json::object());
    for (const auto& [name, spec] : args.items()) {
      EndpointParam p;
      p.name = name;
      p.type = spec.at("type").get<std::string>();
      p.description = spec.value("description", "");
      p.title = spec.value("title", util::title_case(name));
      e.params.push_back(std::move(p));
    }
    return e;
  } catch (const Json::exception& ex) {
    throw Error(ErrorCode::schema_error, std::string("malformed endpoint: ") + ex.what());
  }
}

std::string endpoint_path(const std::string& db, const std::string& resource) {
  return "/v1/bird/" + db + "/" + resource;
}

std::string endpoint_name(const std::string& db, const std::string& resource) {
  return "get_" + resource + "_v1_bird_" + db + "_" + resource + "_get";
}

namespace {

runtime::SqlValue bind_one(const EndpointParam& p, const Json& v) {
  auto bad = [&] {
    return Error(ErrorCode::bad_type, "parameter " + p.name + " expects " + p.type + ", got " +
                                          v.dump());
  };
  if (p.type == "integer") {
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (std::floor(d) == d && std::abs(d) < 9.0e18) return static_cast<std::int64_t>(d);
      throw bad();
    }
    if (v.is_boolean()) return static_cast<std::int64_t>(v.get<bool>() ? 1 : 0);
    if (v.is_string()) {
      if (auto iv = util::parse_integer(util::trim(v.get<std::string>()))) return *iv;
    }
    throw bad();
  }
  if (p.type == "number") {
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      const auto s = util::trim(v.get<std::string>());
      if (auto iv = util::parse_integer(s)) return *iv;
      if (auto d = util::parse_number(s)) return *d;
    }
    throw bad();
  }
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number()) return util::format_real(v.get<double>());
  throw bad();
}

}  // namespace

std::vector<runtime::SqlValue> bind_arguments(const RestEndpoint& endpoint, const Json& arguments) {
  if (!arguments.is_object()) throw Error(ErrorCode::bad_argument, "arguments must be an object");
  std::vector<runtime::SqlValue> out;
  out.reserve(endpoint.params.size());
  for (const auto& p : endpoint.params) {
    auto it = arguments.find(p.name);
    if (it == arguments.end() || it->is_null()) {
      throw Error(ErrorCode::missing_param, "missing required parameter: " + p.name);
    }
    out.push_back(bind_one(p, *it));
  }
  return out;
}

Json coerce_query_params(const RestEndpoint& endpoint,
                         const std::multimap<std::string, std::string>& query) {
  Json out = Json::object();
  for (const auto& p : endpoint.params) {
    auto it = query.find(p.name);
    if (it == query.end()) continue;
    const std::string& raw = it->second;
    if (p.type == "integer") {
      auto iv = util::parse_integer(raw);
      if (!iv) throw Error(ErrorCode::bad_type, "parameter " + p.name + " expects an integer");
      out[p.name] = *iv;
    } else if (p.type == "number") {
      if (auto iv = util::parse_integer(raw)) {
        out[p.name] = *iv;
      } else if (auto d = util::parse_number(raw)) {
        out[p.name] = *d;
      } else {
        throw Error(ErrorCode::bad_type, "parameter " + p.name + " expects a number");
      }
    } else {
      out[p.name] = raw;
    }
  }
  return out;
}

Json execute_endpoint(const RestEndpoint& endpoint, const Json& arguments,
                      const runtime::Database& db) {
  const auto binds = bind_arguments(endpoint, arguments);
  runtime::QueryResult result;
  try {
    result = db.query(endpoint.sql_template, binds);
  } catch (const Error& e) {
    throw Error(ErrorCode::execution_error, e.what());
  }
  Json values = Json::array();
  if (result.columns.size() == 1) {
    for (const auto& row : result.rows) values.push_back(runtime::to_json(row[0]));
  } else {
    values = result.rows_json();
  }
  Json out = Json::object();
  out[endpoint.resource] = std::move(values);
  return out;
}

}  // namespace toolbench::rest
