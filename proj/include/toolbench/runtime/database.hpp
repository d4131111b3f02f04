#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "toolbench/util/json.hpp"

struct sqlite3;

namespace toolbench::runtime {

using SqlValue = std::variant<std::monostate, std::int64_t, double, std::string>;

struct QueryResult {
  std::vector<std::string> columns;
  std::vector<std::vector<SqlValue>> rows;

  /// Rows as JSON arrays; integers stay integers, reals stay reals.
  Json rows_json() const;
};

struct ColumnInfo {
  std::string name;
  std::string declared_type;
};

/// Owning handle to one SQLite connection. Not shareable across threads;
/// open one per worker.
class Database {
 public:
  enum class Mode { read_only, read_write_create };

  explicit Database(const std::filesystem::path& path, Mode mode = Mode::read_only);
  ~Database();
  Database(Database&& other) noexcept;
  Database& operator=(Database&& other) noexcept;
  Database(const Database&) = delete;
  Database& operator=(const Database&) = delete;

  const std::filesystem::path& path() const { return path_; }

  QueryResult query(const std::string& sql, const std::vector<SqlValue>& params = {}) const;
  /// Compiles without executing; throws on error. Returns the placeholder count.
  int prepare_check(const std::string& sql) const;
  void exec_script(const std::string& sql);

  std::vector<std::string> table_names() const;
  std::vector<ColumnInfo> table_columns(const std::string& table) const;
  bool has_table(const std::string& table) const;

 private:
  std::filesystem::path path_;
  sqlite3* db_ = nullptr;
};

Json to_json(const SqlValue& v);

}  // namespace toolbench::runtime
