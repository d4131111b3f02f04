#include "toolbench/eval/normalize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "toolbench/util/strings.hpp"

namespace toolbench::eval {

namespace {

std::string number_token(double v) {
  if (v == 0) v = 0;  // folds -0
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.8e", v);
  return std::string("n:") + buf;
}

void collect(const Json& v, std::vector<std::string>& out) {
  if (v.is_array() || v.is_object()) {
    for (const auto& item : v) collect(item, out);
  } else if (v.is_null()) {
    out.emplace_back("null");
  } else if (v.is_boolean()) {
    out.push_back(number_token(v.get<bool>() ? 1.0 : 0.0));
  } else if (v.is_number()) {
    out.push_back(number_token(v.get<double>()));
  } else {
    const auto s = util::trim(v.get<std::string>());
    if (auto d = util::parse_number(s)) {
      out.push_back(number_token(*d));
    } else {
      out.push_back("s:" + s);
    }
  }
}

}  // namespace

std::vector<std::string> normalize_answer(const Json& value) {
  std::vector<std::string> out;
  collect(value, out);
  std::sort(out.begin(), out.end());
  return out;
}

bool answers_equal(const Json& a, const Json& b) { return normalize_answer(a) == normalize_answer(b); }

Json normalized_json(const Json& value) {
  Json out = Json::array();
  for (const auto& s : normalize_answer(value)) out.push_back(s);
  return out;
}

}  // namespace toolbench::eval
