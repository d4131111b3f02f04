#include "toolbench/runtime/database.hpp"

#include <sqlite3.h>

#include <utility>

#include "toolbench/util/error.hpp"

namespace toolbench::runtime {

namespace {

class Statement {
 public:
  Statement(sqlite3* db, const std::string& sql) : db_(db) {
    const char* tail = nullptr;
    if (sqlite3_prepare_v2(db, sql.c_str(), static_cast<int>(sql.size()), &stmt_, &tail) !=
        SQLITE_OK) {
      throw Error(ErrorCode::database_error, sqlite3_errmsg(db));
    }
    if (stmt_ == nullptr) throw Error(ErrorCode::database_error, "empty statement");
  }
  ~Statement() { sqlite3_finalize(stmt_); }
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;

  sqlite3_stmt* get() const { return stmt_; }

  void bind(const std::vector<SqlValue>& params) {
    const int expected = sqlite3_bind_parameter_count(stmt_);
    if (expected != static_cast<int>(params.size())) {
      throw Error(ErrorCode::database_error,
                  "expected " + std::to_string(expected) + " parameters, got " +
                      std::to_string(params.size()));
    }
    for (int i = 0; i < expected; ++i) {
      const auto& p = params[static_cast<std::size_t>(i)];
      int rc = SQLITE_OK;
      if (std::holds_alternative<std::monostate>(p)) {
        rc = sqlite3_bind_null(stmt_, i + 1);
      } else if (auto iv = std::get_if<std::int64_t>(&p)) {
        rc = sqlite3_bind_int64(stmt_, i + 1, *iv);
      } else if (auto dv = std::get_if<double>(&p)) {
        rc = sqlite3_bind_double(stmt_, i + 1, *dv);
      } else {
        const auto& s = std::get<std::string>(p);
        rc = sqlite3_bind_text(stmt_, i + 1, s.data(), static_cast<int>(s.size()),
                               SQLITE_TRANSIENT);
      }
      if (rc != SQLITE_OK) throw Error(ErrorCode::database_error, sqlite3_errmsg(db_));
    }
  }

 private:
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

std::string quote_identifier(const std::string& name) {
  std::string out = "\"";
  for (char c : name) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

Json to_json(const SqlValue& v) {
  if (std::holds_alternative<std::monostate>(v)) return nullptr;
  if (auto iv = std::get_if<std::int64_t>(&v)) return *iv;
  if (auto dv = std::get_if<double>(&v)) return *dv;
  return std::get<std::string>(v);
}

Json QueryResult::rows_json() const {
  Json out = Json::array();
  for (const auto& row : rows) {
    Json r = Json::array();
    for (const auto& v : row) r.push_back(to_json(v));
    out.push_back(std::move(r));
  }
  return out;
}

Database::Database(const std::filesystem::path& path, Mode mode) : path_(path) {
  const int flags = mode == Mode::read_only ? SQLITE_OPEN_READONLY
                                            : (SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE);
  if (mode == Mode::read_only && !std::filesystem::exists(path)) {
    throw Error(ErrorCode::io_error, "database not found: " + path.string());
  }
  if (sqlite3_open_v2(path.string().c_str(), &db_, flags | SQLITE_OPEN_NOMUTEX, nullptr) !=
      SQLITE_OK) {
    std::string msg = db_ ? sqlite3_errmsg(db_) : "cannot open database";
    sqlite3_close(db_);
    db_ = nullptr;
    throw Error(ErrorCode::database_error, msg + ": " + path.string());
  }
  sqlite3_busy_timeout(db_, 5000);
}

Database::~Database() { sqlite3_close(db_); }

Database::Database(Database&& other) noexcept
    : path_(std::move(other.path_)), db_(std::exchange(other.db_, nullptr)) {}

Database& Database::operator=(Database&& other) noexcept {
  if (this != &other) {
    sqlite3_close(db_);
    path_ = std::move(other.path_);
    db_ = std::exchange(other.db_, nullptr);
  }
  return *this;
}

QueryResult Database::query(const std::string& sql, const std::vector<SqlValue>& params) const {
  Statement stmt(db_, sql);
  stmt.bind(params);
  QueryResult result;
  const int ncols = sqlite3_column_count(stmt.get());
  for (int i = 0; i < ncols; ++i) result.columns.emplace_back(sqlite3_column_name(stmt.get(), i));
  for (;;) {
    const int rc = sqlite3_step(stmt.get());
    if (rc == SQLITE_DONE) break;
    if (rc != SQLITE_ROW) throw Error(ErrorCode::database_error, sqlite3_errmsg(db_));
    std::vector<SqlValue> row;
    row.reserve(static_cast<std::size_t>(ncols));
    for (int i = 0; i < ncols; ++i) {
      switch (sqlite3_column_type(stmt.get(), i)) {
        case SQLITE_NULL:
          row.emplace_back(std::monostate{});
          break;
        case SQLITE_INTEGER:
          row.emplace_back(static_cast<std::int64_t>(sqlite3_column_int64(stmt.get(), i)));
          break;
        case SQLITE_FLOAT:
          row.emplace_back(sqlite3_column_double(stmt.get(), i));
          break;
        default: {
          const auto* text = reinterpret_cast<const char*>(sqlite3_column_text(stmt.get(), i));
          const int len = sqlite3_column_bytes(stmt.get(), i);
          row.emplace_back(std::string(text ? text : "", static_cast<std::size_t>(len)));
        }
      }
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

int Database::prepare_check(const std::string& sql) const {
  Statement stmt(db_, sql);
  return sqlite3_bind_parameter_count(stmt.get());
}

void Database::exec_script(const std::string& sql) {
  char* err = nullptr;
  if (sqlite3_exec(db_, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "script failed";
    sqlite3_free(err);
    throw Error(ErrorCode::database_error, msg);
  }
}

std::vector<std::string> Database::table_names() const {
  auto r = query("SELECT name FROM sqlite_master WHERE type = 'table' AND name NOT LIKE 'sqlite_%' "
                 "ORDER BY rowid");
  std::vector<std::string> out;
  for (const auto& row : r.rows) out.push_back(std::get<std::string>(row[0]));
  return out;
}

std::vector<ColumnInfo> Database::table_columns(const std::string& table) const {
  auto r = query("PRAGMA table_info(" + quote_identifier(table) + ")");
  std::vector<ColumnInfo> out;
  for (const auto& row : r.rows) {
    ColumnInfo c;
    c.name = std::get<std::string>(row[1]);
    if (auto s = std::get_if<std::string>(&row[2])) c.declared_type = *s;
    out.push_back(std::move(c));
  }
  if (out.empty()) throw Error(ErrorCode::missing_table, "no such table: " + table);
  return out;
}

bool Database::has_table(const std::string& table) const {
  auto r = query("SELECT 1 FROM sqlite_master WHERE type = 'table' AND name = ?", {table});
  return !r.rows.empty();
}

}  // namespace toolbench::runtime
