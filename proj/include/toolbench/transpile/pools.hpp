#pragma once

#include <string>
#include <vector>

#include "toolbench/rest/endpoint.hpp"
#include "toolbench/runtime/pool.hpp"

namespace toolbench::transpile {

/// The seven data tools over the given key enum.
runtime::ToolPool slot_pool(const std::vector<runtime::ColumnDescriptor>& columns);

/// Expands categorical arguments into separate tools, replaces retrieve_data
/// with one getter per column and adds the distinct/limit helpers.
runtime::ToolPool derive_sel_pool(const runtime::ToolPool& slot);

/// Name of the SEL getter for a column or aggregate output column.
std::string getter_name(const std::string& key_name);

/// Adds getters for columns that only exist in intermediate tables (grouped
/// or aggregated outputs). Existing getters are left alone.
void add_getters(runtime::ToolPool& sel, const std::vector<std::string>& key_names);

/// One tool per endpoint, dispatching to the endpoint executor.
runtime::ToolPool rest_pool(const std::vector<rest::RestEndpoint>& endpoints);

}  // namespace toolbench::transpile
