#include "lexer.hpp"

#include <cctype>

#include "toolbench/util/error.hpp"

namespace toolbench::sql::detail {

namespace {

bool is_ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool is_ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80; }

[[noreturn]] void fail(std::size_t pos, const std::string& what) {
  throw Error(ErrorCode::syntax_error, what + " at offset " + std::to_string(pos));
}

}  // namespace

std::vector<Token> tokenize(std::string_view sql) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = sql.size();
  while (i < n) {
    unsigned char c = static_cast<unsigned char>(sql[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    if (c == '-' && i + 1 < n && sql[i + 1] == '-') {
      while (i < n && sql[i] != '\n') ++i;
      continue;
    }
    const std::size_t start = i;
    if (c == '\'' || c == '"' || c == '`' || c == '[') {
      const char close = c == '[' ? ']' : static_cast<char>(c);
      std::string text;
      ++i;
      bool closed = false;
      while (i < n) {
        if (sql[i] == close) {
          if (close != ']' && i + 1 < n && sql[i + 1] == close) {
            text += close;
            i += 2;
            continue;
          }
          ++i;
          closed = true;
          break;
        }
        text += sql[i++];
      }
      if (!closed) fail(start, "unterminated quote");
      out.push_back({c == '\'' ? TokenKind::string : TokenKind::quoted_identifier, text, start});
      continue;
    }
    if (std::isdigit(c) || (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(sql[i + 1])))) {
      while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
      if (i < n && sql[i] == '.') {
        ++i;
        while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
      }
      if (i < n && (sql[i] == 'e' || sql[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < n && (sql[j] == '+' || sql[j] == '-')) ++j;
        if (j < n && std::isdigit(static_cast<unsigned char>(sql[j]))) {
          i = j;
          while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
        }
      }
      if (i < n && is_ident_char(static_cast<unsigned char>(sql[i]))) fail(start, "malformed number");
      out.push_back({TokenKind::number, std::string(sql.substr(start, i - start)), start});
      continue;
    }
    if (is_ident_start(c)) {
      while (i < n && is_ident_char(static_cast<unsigned char>(sql[i]))) ++i;
      out.push_back({TokenKind::identifier, std::string(sql.substr(start, i - start)), start});
      continue;
    }
    static constexpr std::string_view two_char[] = {"<=", ">=", "<>", "!=", "==", "||"};
    bool matched = false;
    for (auto op : two_char) {
      if (sql.substr(i, 2) == op) {
        out.push_back({TokenKind::symbol, std::string(op), start});
        i += 2;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (std::string_view("(),.;*+-/=<>%").find(static_cast<char>(c)) != std::string_view::npos) {
      out.push_back({TokenKind::symbol, std::string(1, static_cast<char>(c)), start});
      ++i;
      continue;
    }
    fail(start, std::string("unexpected character '") + static_cast<char>(c) + "'");
  }
  out.push_back({TokenKind::end, "", n});
  return out;
}

}  // namespace toolbench::sql::detail
