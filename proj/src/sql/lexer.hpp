#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace toolbench::sql::detail {

enum class TokenKind { identifier, quoted_identifier, string, number, symbol, end };

struct Token {
  TokenKind kind = TokenKind::end;
  std::string text;  // unquoted content for identifiers and strings
  std::size_t pos = 0;
};

/// Throws Error(syntax_error) on unterminated quotes or stray characters.
std::vector<Token> tokenize(std::string_view sql);

}  // namespace toolbench::sql::detail
