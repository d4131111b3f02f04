#include "toolbench/transpile/catalog.hpp"

#include <algorithm>

#include "toolbench/util/error.hpp"
#include "toolbench/util/fs.hpp"
#include "toolbench/util/strings.hpp"

namespace toolbench::transpile {

std::string dtype_of(const std::string& declared_type) {
  const auto t = util::to_upper(declared_type);
  if (t.find("INT") != std::string::npos) return "integer";
  if (t.find("REAL") != std::string::npos || t.find("FLOA") != std::string::npos ||
      t.find("DOUB") != std::string::npos || t.find("NUM") != std::string::npos ||
      t.find("DEC") != std::string::npos) {
    return "number";
  }
  return "string";
}

std::vector<runtime::ColumnDescriptor> Catalog::column_enum(
    const std::vector<std::string>& tables) const {
  std::vector<runtime::ColumnDescriptor> out;
  for (const auto& c : columns) {
    if (!tables.empty() && std::find(tables.begin(), tables.end(), c.table) == tables.end()) {
      continue;
    }
    out.push_back({c.prefixed_name(), c.description, c.dtype});
  }
  return out;
}

std::vector<std::string> Catalog::table_names() const {
  std::vector<std::string> out;
  for (const auto& c : columns) {
    if (out.empty() || out.back() != c.table) out.push_back(c.table);
  }
  return out;
}

Catalog load_catalog(const runtime::Database& db, const std::string& db_name,
                     const std::filesystem::path& descriptions) {
  Json desc = Json::object();
  if (!descriptions.empty() && std::filesystem::exists(descriptions)) {
    try {
      desc = Json::parse(util::read_file(descriptions));
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::schema_error,
                  "bad descriptions file " + descriptions.string() + ": " + e.what());
    }
  }
  Catalog cat;
  cat.db = db_name;
  for (const auto& table : db.table_names()) {
    for (const auto& info : db.table_columns(table)) {
      CatalogColumn c;
      c.table = table;
      c.column = info.name;
      c.declared_type = info.declared_type;
      c.dtype = dtype_of(info.declared_type);
      c.description = info.name + " of " + table;
      if (desc.contains(table) && desc[table].contains(info.name)) {
        c.description = desc[table][info.name].get<std::string>();
      }
      cat.columns.push_back(std::move(c));
    }
  }
  return cat;
}

}  // namespace toolbench::transpile
