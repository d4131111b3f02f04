#include "toolbench/runtime/table.hpp"

#include "toolbench/util/error.hpp"
#include "toolbench/util/fs.hpp"
#include "toolbench/util/strings.hpp"

namespace toolbench::runtime {

std::optional<std::size_t> Table::find_column(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  std::optional<std::size_t> found;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (util::iequals(columns[i], name)) {
      if (found) return std::nullopt;
      found = i;
    }
  }
  return found;
}

std::size_t Table::column_index(std::string_view name) const {
  if (auto i = find_column(name)) return *i;
  throw Error(ErrorCode::unknown_column, "unknown column: " + std::string(name));
}

bool Table::is_numeric_column(std::size_t index) const {
  for (const auto& row : rows) {
    const auto& c = row[index];
    if (c && !util::parse_number(*c)) return false;
  }
  return true;
}

Json Table::cell_json(std::size_t row, std::size_t column) const {
  const auto& c = rows[row][column];
  if (!c) return nullptr;
  if (is_numeric_column(column)) {
    if (auto iv = util::parse_integer(*c)) return *iv;
    return *util::parse_number(*c);
  }
  return *c;
}

Json Table::rows_json() const {
  std::vector<bool> numeric(columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) numeric[j] = is_numeric_column(j);
  Json out = Json::array();
  for (const auto& row : rows) {
    Json r = Json::array();
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (!row[j]) {
        r.push_back(nullptr);
      } else if (numeric[j]) {
        if (auto iv = util::parse_integer(*row[j])) {
          r.push_back(*iv);
        } else {
          r.push_back(*util::parse_number(*row[j]));
        }
      } else {
        r.push_back(*row[j]);
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

void append_field(std::string& out, const Cell& c) {
  if (!c) return;
  const std::string& s = *c;
  const bool quote =
      s.empty() || s.find_first_of(",\"\r\n") != std::string::npos;
  if (!quote) {
    out += s;
    return;
  }
  out += '"';
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
}

void append_row(std::string& out, const std::vector<Cell>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += ',';
    append_field(out, row[i]);
  }
  out += "\r\n";
}

}  // namespace

std::string to_csv(const Table& table) {
  std::string out;
  std::vector<Cell> header(table.columns.begin(), table.columns.end());
  append_row(out, header);
  for (const auto& row : table.rows) append_row(out, row);
  return out;
}

Table parse_csv(std::string_view text) {
  std::vector<std::vector<Cell>> records;
  std::vector<Cell> record;
  std::string field;
  bool quoted = false;
  bool any = false;
  std::size_t i = 0;
  auto end_field = [&] {
    record.push_back(quoted ? Cell(field) : (field.empty() ? Cell() : Cell(field)));
    field.clear();
    quoted = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
    any = false;
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == '"' && field.empty() && !quoted) {
      quoted = true;
      any = true;
      ++i;
      for (;;) {
        if (i >= text.size()) throw Error(ErrorCode::io_error, "unterminated quoted CSV field");
        if (text[i] == '"') {
          if (i + 1 < text.size() && text[i + 1] == '"') {
            field += '"';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        field += text[i++];
      }
      continue;
    }
    if (c == ',') {
      end_field();
      any = true;
      ++i;
    } else if (c == '\r' || c == '\n') {
      end_record();
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      ++i;
    } else {
      if (quoted) throw Error(ErrorCode::io_error, "text after closing quote in CSV field");
      field += c;
      any = true;
      ++i;
    }
  }
  if (any || !field.empty() || !record.empty()) end_record();

  Table t;
  if (records.empty()) return t;
  for (auto& h : records.front()) t.columns.push_back(h.value_or(""));
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.columns.size()) {
      throw Error(ErrorCode::io_error, "CSV row " + std::to_string(r) + " has " +
                                           std::to_string(records[r].size()) + " fields, expected " +
                                           std::to_string(t.columns.size()));
    }
    t.rows.push_back(std::move(records[r]));
  }
  return t;
}

Table read_csv(const std::filesystem::path& path) { return parse_csv(util::read_file(path)); }

void write_csv(const std::filesystem::path& path, const Table& table) {
  util::write_file(path, to_csv(table));
}

}  // namespace toolbench::runtime
