#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "toolbench/runtime/database.hpp"
#include "toolbench/runtime/pool.hpp"

namespace toolbench::transpile {

struct CatalogColumn {
  std::string table;
  std::string column;
  std::string declared_type;
  std::string description;
  std::string dtype;  // "integer" | "number" | "string"

  std::string prefixed_name() const { return table + "_" + column; }
};

/// Column metadata of one database, tables in creation order.
struct Catalog {
  std::string db;
  std::vector<CatalogColumn> columns;

  /// Key enum restricted to `tables` (all tables when empty), in catalog order.
  std::vector<runtime::ColumnDescriptor> column_enum(const std::vector<std::string>& tables = {}) const;
  std::vector<std::string> table_names() const;
};

/// Reads the schema from the database and descriptions from the optional
/// sidecar `{table: {column: description}}`. Columns without a description
/// fall back to "<column> of <table>".
Catalog load_catalog(const runtime::Database& db, const std::string& db_name,
                     const std::filesystem::path& descriptions = {});

std::string dtype_of(const std::string& declared_type);

}  // namespace toolbench::transpile
