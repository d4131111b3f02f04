#include "toolbench/eval/parser.hpp"

#include <regex>

#include "toolbench/util/strings.hpp"

namespace toolbench::eval {

namespace {

class LiteralParser {
 public:
  explicit LiteralParser(std::string_view s) : s_(s) {}

  std::optional<Json> parse_all() {
    auto v = value();
    skip_ws();
    if (!v || pos_ != s_.size()) return std::nullopt;
    return v;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  bool keyword(std::string_view word) {
    if (s_.substr(pos_, word.size()) != word) return false;
    const std::size_t end = pos_ + word.size();
    if (end < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '_')) {
      return false;
    }
    pos_ = end;
    return true;
  }

  std::optional<Json> value() {
    if (++depth_ > 256) return std::nullopt;
    skip_ws();
    std::optional<Json> out;
    if (pos_ >= s_.size()) {
      out = std::nullopt;
    } else if (s_[pos_] == '{') {
      out = dict();
    } else if (s_[pos_] == '[') {
      out = sequence('[', ']');
    } else if (s_[pos_] == '(') {
      out = sequence('(', ')');
    } else if (s_[pos_] == '\'' || s_[pos_] == '"') {
      auto str = string();
      if (str) out = Json(*str);
    } else if (keyword("True")) {
      out = Json(true);
    } else if (keyword("False")) {
      out = Json(false);
    } else if (keyword("None")) {
      out = Json(nullptr);
    } else {
      out = number();
    }
    --depth_;
    return out;
  }

  std::optional<Json> dict() {
    ++pos_;
    Json obj = Json::object();
    if (consume('}')) return obj;
    while (true) {
      skip_ws();
      auto key = value();
      if (!key || !key->is_string()) return std::nullopt;
      if (!consume(':')) return std::nullopt;
      auto v = value();
      if (!v) return std::nullopt;
      obj[key->get<std::string>()] = std::move(*v);
      if (consume('}')) return obj;
      if (!consume(',')) return std::nullopt;
      if (consume('}')) return obj;
    }
  }

  std::optional<Json> sequence(char open, char close) {
    (void)open;
    ++pos_;
    Json arr = Json::array();
    if (consume(close)) return arr;
    while (true) {
      auto v = value();
      if (!v) return std::nullopt;
      arr.push_back(std::move(*v));
      if (consume(close)) return arr;
      if (!consume(',')) return std::nullopt;
      if (consume(close)) return arr;
    }
  }

  std::optional<std::string> string() {
    const char quote = s_[pos_++];
    std::string out;
    while (pos_ < s_.size()) {
      const char c = s_[pos_++];
      if (c == quote) return out;
      if (c == '\n') return std::nullopt;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (pos_ >= s_.size()) return std::nullopt;
      const char e = s_[pos_++];
      switch (e) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case '0': out += '\0'; break;
        case '\\': out += '\\'; break;
        case '\'': out += '\''; break;
        case '"': out += '"'; break;
        case '\n': break;
        case 'u': {
          if (pos_ + 4 > s_.size()) return std::nullopt;
          unsigned cp = 0;
          for (int i = 0; i < 4; ++i) {
            const char h = s_[pos_++];
            cp <<= 4;
            if (h >= '0' && h <= '9') cp |= static_cast<unsigned>(h - '0');
            else if (h >= 'a' && h <= 'f') cp |= static_cast<unsigned>(h - 'a' + 10);
            else if (h >= 'A' && h <= 'F') cp |= static_cast<unsigned>(h - 'A' + 10);
            else return std::nullopt;
          }
          append_utf8(out, cp);
          break;
        }
        default:
          out += '\\';
          out += e;
      }
    }
    return std::nullopt;
  }

  static void append_utf8(std::string& out, unsigned cp) {
    if (cp < 0x80) {
      out += static_cast<char>(cp);
    } else if (cp < 0x800) {
      out += static_cast<char>(0xC0 | (cp >> 6));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
      out += static_cast<char>(0xE0 | (cp >> 12));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    }
  }

  std::optional<Json> number() {
    const std::size_t start = pos_;
    if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) ++pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) ||
                                s_[pos_] == '.' || s_[pos_] == '_' ||
                                ((s_[pos_] == '-' || s_[pos_] == '+') &&
                                 (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E')))) {
      ++pos_;
    }
    std::string text(s_.substr(start, pos_ - start));
    std::erase(text, '_');
    if (text.empty()) return std::nullopt;
    if (auto i = util::parse_integer(text)) return Json(*i);
    if (auto d = util::parse_number(text)) return Json(*d);
    return std::nullopt;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

// Drops prose before the first bracket or brace.
std::string_view strip_leading_prose(std::string_view text) {
  const auto pos = text.find_first_of("[{");
  return pos == std::string_view::npos ? std::string_view{} : text.substr(pos);
}

std::optional<Json> parse_json_text(std::string_view text) {
  const std::string trimmed = util::trim(text);
  if (trimmed.empty()) return std::nullopt;
  auto whole = Json::parse(trimmed, nullptr, false);
  if (!whole.is_discarded()) return whole;
  const std::string body(strip_leading_prose(trimmed));
  if (!body.empty() && body.size() != trimmed.size()) {
    auto stripped = Json::parse(body, nullptr, false);
    if (!stripped.is_discarded()) return stripped;
  }
  // JSON lines: every non-blank line must parse.
  Json lines = Json::array();
  std::size_t count = 0;
  for (const auto& line : util::split(trimmed, '\n')) {
    const auto t = util::trim(line);
    if (t.empty()) continue;
    auto v = Json::parse(t, nullptr, false);
    if (v.is_discarded()) return std::nullopt;
    lines.push_back(std::move(v));
    ++count;
  }
  if (count < 2) return std::nullopt;
  return lines;
}

std::optional<Json> parse_literal_text(std::string_view text) {
  const std::string trimmed = util::trim(text);
  if (trimmed.empty()) return std::nullopt;
  if (auto v = parse_python_literal(trimmed)) return v;
  const auto body = strip_leading_prose(trimmed);
  if (!body.empty() && body.size() != trimmed.size()) return parse_python_literal(body);
  return std::nullopt;
}

std::optional<Json> parse_fragment(std::string_view text) {
  if (auto v = parse_json_text(text)) return v;
  return parse_literal_text(text);
}

void flatten_into(const Json& v, Json& out) {
  if (v.is_array()) {
    for (const auto& e : v) flatten_into(e, out);
  } else {
    out.push_back(v);
  }
}

Json flatten(const Json& v) {
  Json out = Json::array();
  flatten_into(v, out);
  return out;
}

bool is_call_object(const Json& v) {
  if (!v.is_object()) return false;
  auto name = v.find("name");
  auto args = v.find("arguments");
  if (name == v.end() || !name->is_string()) return false;
  if (args == v.end() || !args->is_object()) return false;
  auto label = v.find("label");
  return label == v.end() || label->is_string() || label->is_null();
}

}  // namespace

std::string_view to_string(ParseStage s) {
  switch (s) {
    case ParseStage::json: return "json";
    case ParseStage::literal: return "literal";
    case ParseStage::xml_tags: return "xml_tags";
    case ParseStage::fenced_block: return "fenced_block";
    case ParseStage::failed: return "failed";
  }
  return "failed";
}

std::optional<Json> parse_python_literal(std::string_view text) {
  return LiteralParser(text).parse_all();
}

Json ParsedPrediction::to_json() const {
  Json j = Json::object();
  j["stage"] = std::string(to_string(stage));
  j["well_formed"] = well_formed;
  j["calls"] = runtime::to_json(calls);
  return j;
}

ParsedPrediction parse_model_output(std::string_view text) {
  ParsedPrediction out;
  out.raw_text = std::string(text);

  std::optional<Json> payload;
  if ((payload = parse_json_text(text))) {
    out.stage = ParseStage::json;
  } else if ((payload = parse_literal_text(text))) {
    out.stage = ParseStage::literal;
  } else {
    static const std::regex tag_re(R"(<tool_call>\s*([\s\S]*?)\s*</tool_call>)");
    static const std::regex fence_re(R"(```json\s*([\s\S]*?)\s*```)");
    const std::string s(text);
    Json tagged = Json::array();
    bool any_tag = false;
    bool tags_ok = true;
    for (auto it = std::sregex_iterator(s.begin(), s.end(), tag_re); it != std::sregex_iterator();
         ++it) {
      any_tag = true;
      auto v = parse_fragment((*it)[1].str());
      if (!v) {
        tags_ok = false;
        break;
      }
      tagged.push_back(std::move(*v));
    }
    if (any_tag && tags_ok) {
      payload = std::move(tagged);
      out.stage = ParseStage::xml_tags;
    } else {
      std::optional<std::string> last_block;
      for (auto it = std::sregex_iterator(s.begin(), s.end(), fence_re);
           it != std::sregex_iterator(); ++it) {
        last_block = (*it)[1].str();
      }
      if (last_block && (payload = parse_fragment(*last_block))) out.stage = ParseStage::fenced_block;
    }
  }
  if (!payload) {
    out.stage = ParseStage::failed;
    return out;
  }

  out.payload = flatten(*payload);
  out.well_formed = std::all_of(out.payload.begin(), out.payload.end(), is_call_object);
  if (out.well_formed) {
    for (const auto& v : out.payload) out.calls.push_back(runtime::ToolCall::from_json(v));
  }
  return out;
}

}  // namespace toolbench::eval
