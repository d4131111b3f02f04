#pragma once

#include <string>
#include <vector>

#include "toolbench/rest/endpoint.hpp"
#include "toolbench/sql/ast.hpp"
#include "toolbench/transpile/catalog.hpp"

namespace toolbench::transpile {

struct SynthesizedEndpoint {
  rest::RestEndpoint endpoint;
  Json arguments;  // the query's own literals, keyed by parameter name
};

/// Builds a GET endpoint for one query: every WHERE literal becomes a query
/// parameter and the SQL becomes a `?` template. The natural-language input
/// is accepted for generators that use it; the template generator does not.
SynthesizedEndpoint synthesize_rest_endpoint(const sql::SqlAst& ast, const std::string& nl_input,
                                             const std::string& db,
                                             const Catalog* catalog = nullptr);

struct DedupResult {
  std::vector<rest::RestEndpoint> endpoints;
  std::vector<std::size_t> instance_endpoint;  // input index -> endpoint index
};

/// Merges endpoints of the same database whose templates are identical. The
/// survivor keeps the lexicographically smallest name; order follows first
/// appearance.
DedupResult deduplicate_endpoints(const std::vector<rest::RestEndpoint>& endpoints);

/// Gives distinct endpoints distinct resources within a database: later
/// endpoints with a taken resource append their parameter names, then a
/// numeric suffix. Names and paths are updated to match.
void disambiguate_names(std::vector<rest::RestEndpoint>& endpoints);

}  // namespace toolbench::transpile
