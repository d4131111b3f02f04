#include "toolbench/runtime/tools.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "toolbench/util/error.hpp"
#include "toolbench/util/strings.hpp"

namespace toolbench::runtime::tools {

namespace {

Cell to_cell(const SqlValue& v) {
  if (std::holds_alternative<std::monostate>(v)) return std::nullopt;
  if (auto iv = std::get_if<std::int64_t>(&v)) return std::to_string(*iv);
  if (auto dv = std::get_if<double>(&v)) return util::format_real(*dv);
  return std::get<std::string>(v);
}

std::string quote_identifier(const std::string& name) {
  std::string out = "\"";
  for (char c : name) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Join key: numbers compare by value, so "7" and "7.0" meet.
std::optional<std::string> join_key(const Cell& c) {
  if (!c) return std::nullopt;
  if (auto d = util::parse_number(*c)) return "n:" + util::format_real(*d);
  return "s:" + *c;
}

struct LoadedTable {
  std::string alias;
  std::string prefix;
  Table table;
};

std::pair<std::string, std::string> split_qualified(const Json& ref) {
  if (!ref.is_string()) throw Error(ErrorCode::bad_argument, "join column must be a string");
  const std::string s = ref.get<std::string>();
  const auto dot = s.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == s.size()) {
    throw Error(ErrorCode::bad_argument, "join column must be alias.column: " + s);
  }
  return {s.substr(0, dot), s.substr(dot + 1)};
}

std::string value_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number()) return util::format_real(v.get<double>());
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  throw Error(ErrorCode::bad_argument, "unsupported comparison value: " + v.dump());
}

std::optional<double> value_number(const Json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return util::parse_number(v.get<std::string>());
  return std::nullopt;
}

template <typename T>
bool compare(const T& a, const T& b, sql::ConditionKind cond) {
  switch (cond) {
    case sql::ConditionKind::equal_to: return a == b;
    case sql::ConditionKind::not_equal_to: return a != b;
    case sql::ConditionKind::greater_than: return a > b;
    case sql::ConditionKind::less_than: return a < b;
    case sql::ConditionKind::greater_than_equal_to: return a >= b;
    case sql::ConditionKind::less_than_equal_to: return a <= b;
    default: return false;
  }
}

// Numbers by value or text bytewise. NULLs are handled by the caller.
struct CellLess {
  bool numeric;
  bool operator()(const Cell& a, const Cell& b) const {
    if (!a || !b) return !a && b;
    if (numeric) return *util::parse_number(*a) < *util::parse_number(*b);
    return *a < *b;
  }
};

Cell aggregate_cells(const Table& data, const std::vector<std::size_t>& rows,
                     std::optional<std::size_t> target, sql::Aggregate op) {
  using sql::Aggregate;
  if (op == Aggregate::count) return std::to_string(rows.size());
  if (!target) throw Error(ErrorCode::bad_argument, "aggregate requires a target column");
  const bool numeric = data.is_numeric_column(*target);
  if ((op == Aggregate::sum || op == Aggregate::avg) && !numeric) {
    throw Error(ErrorCode::non_numeric_aggregate,
                std::string(sql::to_string(op)) + " over non-numeric column " +
                    data.columns[*target]);
  }
  std::vector<const std::string*> present;
  for (auto r : rows) {
    if (const auto& c = data.rows[r][*target]) present.push_back(&*c);
  }
  if (present.empty()) return std::nullopt;
  switch (op) {
    case Aggregate::sum: {
      bool all_int = true;
      std::int64_t isum = 0;
      double dsum = 0;
      for (auto* s : present) {
        auto iv = util::parse_integer(*s);
        if (iv && all_int) {
          if (__builtin_add_overflow(isum, *iv, &isum)) all_int = false;
        } else {
          all_int = false;
        }
        dsum += *util::parse_number(*s);
      }
      return all_int ? std::to_string(isum) : util::format_real(dsum);
    }
    case Aggregate::avg: {
      double dsum = 0;
      for (auto* s : present) dsum += *util::parse_number(*s);
      return util::format_real(dsum / static_cast<double>(present.size()));
    }
    case Aggregate::min:
    case Aggregate::max: {
      CellLess less{numeric};
      const std::string* best = present.front();
      for (auto* s : present) {
        const bool better = op == Aggregate::min ? less(Cell(*s), Cell(*best))
                                                 : less(Cell(*best), Cell(*s));
        if (better) best = s;
      }
      return *best;
    }
    default:
      break;
  }
  return std::nullopt;
}

std::int64_t integral_arg(const Json& args, const char* name) {
  if (!args.is_object() || !args.contains(name)) {
    throw Error(ErrorCode::bad_argument, std::string("missing operation argument ") + name);
  }
  const Json& v = args.at(name);
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) == d) return static_cast<std::int64_t>(d);
  }
  if (v.is_string()) {
    if (auto iv = util::parse_integer(v.get<std::string>())) return *iv;
  }
  throw Error(ErrorCode::bad_argument, std::string("operation argument ") + name +
                                           " must be an integer");
}

}  // namespace

Table initialize_active_data(const Json& condition_sequence, const Json& alias_to_table_dict,
                             const Database& db) {
  if (!alias_to_table_dict.is_object() || alias_to_table_dict.empty()) {
    throw Error(ErrorCode::bad_argument, "alias_to_table_dict must be a non-empty object");
  }
  std::vector<LoadedTable> loaded;
  for (const auto& [alias, entry] : alias_to_table_dict.items()) {
    if (!entry.is_object() || !entry.contains("original_table_name")) {
      throw Error(ErrorCode::bad_argument, "alias " + alias + " lacks original_table_name");
    }
    const auto name = entry.at("original_table_name").get<std::string>();
    const auto prefix = entry.value("modified_table_name", name);
    if (!db.has_table(name)) throw Error(ErrorCode::missing_table, "no such table: " + name);
    auto result = db.query("SELECT * FROM " + quote_identifier(name) + " ORDER BY rowid");
    LoadedTable lt{alias, prefix, {}};
    for (const auto& c : result.columns) lt.table.columns.push_back(prefix + "_" + c);
    for (const auto& row : result.rows) {
      std::vector<Cell> cells;
      cells.reserve(row.size());
      for (const auto& v : row) cells.push_back(to_cell(v));
      lt.table.rows.push_back(std::move(cells));
    }
    loaded.push_back(std::move(lt));
  }

  auto find_alias = [&](const std::string& a) -> LoadedTable* {
    for (auto& lt : loaded) {
      if (lt.alias == a || util::iequals(lt.alias, a)) return &lt;
    }
    throw Error(ErrorCode::bad_argument, "unknown alias in join: " + a);
  };

  Table acc = loaded.front().table;
  std::vector<std::string> joined{loaded.front().alias};
  auto is_joined = [&](const std::string& a) {
    return std::any_of(joined.begin(), joined.end(),
                       [&](const std::string& j) { return util::iequals(j, a); });
  };

  if (!condition_sequence.is_null() && !condition_sequence.is_array()) {
    throw Error(ErrorCode::bad_argument, "condition_sequence must be a list");
  }
  for (const auto& cond : condition_sequence.is_array() ? condition_sequence : Json::array()) {
    if (!cond.is_array() || cond.size() < 2) {
      throw Error(ErrorCode::bad_argument, "join condition must be [left, right, kind]");
    }
    if (cond.size() > 2 && !util::iequals(cond[2].get<std::string>(), "INNER")) {
      throw Error(ErrorCode::unsupported_construct, "only INNER joins are supported");
    }
    auto [la, lc] = split_qualified(cond[0]);
    auto [ra, rc] = split_qualified(cond[1]);
    if (is_joined(ra) && !is_joined(la)) {
      std::swap(la, ra);
      std::swap(lc, rc);
    }
    if (!is_joined(la) || is_joined(ra)) {
      throw Error(ErrorCode::bad_argument, "join must link a joined table to a new one");
    }
    LoadedTable* left = find_alias(la);
    LoadedTable* right = find_alias(ra);
    auto li_opt = acc.find_column(left->prefix + "_" + lc);
    auto ri_opt = right->table.find_column(right->prefix + "_" + rc);
    if (!li_opt || !ri_opt) {
      throw Error(ErrorCode::missing_column,
                  "no such join column: " + (li_opt ? ra + "." + rc : la + "." + lc));
    }
    const std::size_t li = *li_opt;
    const std::size_t ri = *ri_opt;

    std::unordered_map<std::string, std::vector<std::size_t>> index;
    for (std::size_t r = 0; r < right->table.rows.size(); ++r) {
      if (auto k = join_key(right->table.rows[r][ri])) index[*k].push_back(r);
    }
    Table out;
    out.columns = acc.columns;
    out.columns.insert(out.columns.end(), right->table.columns.begin(), right->table.columns.end());
    for (const auto& row : acc.rows) {
      auto k = join_key(row[li]);
      if (!k) continue;
      auto it = index.find(*k);
      if (it == index.end()) continue;
      for (auto r : it->second) {
        auto combined = row;
        const auto& rrow = right->table.rows[r];
        combined.insert(combined.end(), rrow.begin(), rrow.end());
        out.rows.push_back(std::move(combined));
      }
    }
    acc = std::move(out);
    joined.push_back(right->alias);
  }
  if (joined.size() != loaded.size()) {
    throw Error(ErrorCode::bad_argument, "every aliased table must be joined");
  }
  return acc;
}

Table filter_data(const Table& data, std::string_view key_name, const Json& value,
                  sql::ConditionKind condition) {
  const std::size_t col = data.column_index(key_name);
  Table out;
  out.columns = data.columns;
  const std::string text = value_text(value);
  const auto number = value_number(value);
  const bool numeric = number && data.is_numeric_column(col);
  for (const auto& row : data.rows) {
    const Cell& c = row[col];
    if (!c) continue;
    bool keep = false;
    switch (condition) {
      case sql::ConditionKind::contains:
        keep = c->find(text) != std::string::npos;
        break;
      case sql::ConditionKind::like:
        keep = like_match(*c, text);
        break;
      default:
        keep = numeric ? compare(*util::parse_number(*c), *number, condition)
                       : compare(*c, text, condition);
    }
    if (keep) out.rows.push_back(row);
  }
  return out;
}

Table sort_data(const Table& data, std::string_view key_name, bool ascending) {
  const std::size_t col = data.column_index(key_name);
  CellLess less{data.is_numeric_column(col)};
  Table out = data;
  std::stable_sort(out.rows.begin(), out.rows.end(),
                   [&](const std::vector<Cell>& a, const std::vector<Cell>& b) {
                     const Cell& x = a[col];
                     const Cell& y = b[col];
                     if (!x || !y) return x.has_value() && !y.has_value();
                     return ascending ? less(x, y) : less(y, x);
                   });
  return out;
}

Table group_data_by(const Table& data, std::string_view key_name, sql::Aggregate aggregation,
                    const std::optional<std::string>& target_key) {
  const std::size_t key = data.column_index(key_name);
  std::optional<std::size_t> target;
  if (target_key) target = data.column_index(*target_key);

  std::vector<Cell> order;
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t r = 0; r < data.rows.size(); ++r) {
    const Cell& c = data.rows[r][key];
    const std::string k = c ? "v" + *c : "null";
    auto [it, inserted] = slot.try_emplace(k, order.size());
    if (inserted) {
      order.push_back(c);
      members.emplace_back();
    }
    members[it->second].push_back(r);
  }
  Table out;
  out.columns = {data.columns[key],
                 aggregate_column_name(aggregation,
                                       target ? std::optional(data.columns[*target]) : std::nullopt)};
  for (std::size_t g = 0; g < order.size(); ++g) {
    out.rows.push_back({order[g], aggregate_cells(data, members[g], target, aggregation)});
  }
  return out;
}

Table aggregate_data(const Table& data, const std::optional<std::string>& key_name,
                     sql::Aggregate operation) {
  std::optional<std::size_t> target;
  if (key_name) target = data.column_index(*key_name);
  std::vector<std::size_t> all(data.rows.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  Table out;
  out.columns = {aggregate_column_name(
      operation, target ? std::optional(data.columns[*target]) : std::nullopt)};
  out.rows.push_back({aggregate_cells(data, all, target, operation)});
  return out;
}

Json retrieve_data(const Table& data, std::string_view key_name, bool distinct,
                   std::int64_t limit) {
  if (limit == 0 || limit < -1) {
    throw Error(ErrorCode::bad_limit, "limit must be positive or -1, got " + std::to_string(limit));
  }
  const std::size_t col = data.column_index(key_name);
  Json values = Json::array();
  if (data.is_numeric_column(col)) {
    for (std::size_t r = 0; r < data.rows.size(); ++r) values.push_back(data.cell_json(r, col));
  } else {
    for (const auto& row : data.rows) {
      values.push_back(row[col] ? Json(*row[col]) : Json(nullptr));
    }
  }
  if (distinct) values = distinct_values(values);
  return limit_values(values, limit);
}

Json select_unique_values(const Table& data, std::string_view key_name) {
  return retrieve_data(data, key_name, true, -1);
}

Table transform_data(const Table& data, std::string_view key_name,
                     std::string_view operation_type, const Json& operation_args) {
  if (operation_type != "substring") {
    throw Error(ErrorCode::unknown_operation,
                "unknown transform operation: " + std::string(operation_type));
  }
  const std::int64_t start = integral_arg(operation_args, "start_index");
  const std::int64_t end = integral_arg(operation_args, "end_index");
  if (start < 0 || end < start) {
    throw Error(ErrorCode::bad_range, "invalid substring range [" + std::to_string(start) + ", " +
                                          std::to_string(end) + ")");
  }
  const std::size_t col = data.column_index(key_name);
  Table out = data;
  for (auto& row : out.rows) {
    if (row[col]) {
      row[col] = util::utf8_slice(*row[col], static_cast<std::size_t>(start),
                                  static_cast<std::size_t>(end));
    }
  }
  return out;
}

Json distinct_values(const Json& values) {
  if (!values.is_array()) throw Error(ErrorCode::bad_argument, "expected a list of values");
  Json out = Json::array();
  for (const auto& v : values) {
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  return out;
}

Json limit_values(const Json& values, std::int64_t limit) {
  if (!values.is_array()) throw Error(ErrorCode::bad_argument, "expected a list of values");
  if (limit == 0 || limit < -1) {
    throw Error(ErrorCode::bad_limit, "limit must be positive or -1, got " + std::to_string(limit));
  }
  if (limit == -1 || static_cast<std::size_t>(limit) >= values.size()) return values;
  return Json(values.begin(), values.begin() + limit);
}

std::string aggregate_column_name(sql::Aggregate op, const std::optional<std::string>& target) {
  if (op == sql::Aggregate::count && !target) return "count";
  return std::string(sql::to_string(op)) + "_" + target.value_or("all");
}

bool like_match(std::string_view text, std::string_view pattern) {
  auto lower = [](char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
  };
  // Two-pointer wildcard match with backtracking to the last '%'.
  std::size_t t = 0, p = 0;
  std::size_t star = std::string_view::npos, mark = 0;
  while (t < text.size()) {
    if (p < pattern.size() && pattern[p] == '%') {
      star = p++;
      mark = t;
    } else if (p < pattern.size() && (pattern[p] == '_' || lower(pattern[p]) == lower(text[t]))) {
      ++p;
      ++t;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      t = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '%') ++p;
  return p == pattern.size();
}

}  // namespace toolbench::runtime::tools
