#pragma once

#include <map>
#include <string>
#include <vector>

#include "toolbench/runtime/database.hpp"
#include "toolbench/sql/ast.hpp"
#include "toolbench/util/json.hpp"

namespace toolbench::rest {

struct EndpointParam {
  std::string name;
  std::string type;  // "integer" | "number" | "string"
  std::string description;
  std::string title;
};

/// A parameterised GET endpoint. The i-th `?` in sql_template binds params[i].
struct RestEndpoint {
  std::string name;
  std::string description;
  std::string db;
  std::string resource;
  std::string path;
  std::string sql_template;
  std::vector<EndpointParam> params;

  Json to_json() const;
  static RestEndpoint from_json(const Json& j);
};

std::string endpoint_path(const std::string& db, const std::string& resource);
std::string endpoint_name(const std::string& db, const std::string& resource);

/// Converts typed JSON arguments to SQL bindings. Throws Error(missing_param)
/// naming the first absent parameter, Error(bad_type) on a type mismatch.
std::vector<runtime::SqlValue> bind_arguments(const RestEndpoint& endpoint, const Json& arguments);

/// Parses raw query-string values according to the declared parameter types.
Json coerce_query_params(const RestEndpoint& endpoint,
                         const std::multimap<std::string, std::string>& query);

/// Runs the template and wraps rows as {resource: values}: a flat list for a
/// single output column, a list of row arrays otherwise.
Json execute_endpoint(const RestEndpoint& endpoint, const Json& arguments,
                      const runtime::Database& db);

}  // namespace toolbench::rest
