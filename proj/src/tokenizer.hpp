#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace changeminer::detail {

enum class TokenType { Name, Number, String, Op, Newline, Indent, Dedent, End };

struct Token {
  TokenType type;
  std::string text;
  int line;
  int col;
  int end_line;
  int end_col;
};

/// Splits Python source into tokens with INDENT/DEDENT/NEWLINE handling,
/// implicit line joining inside brackets and backslash continuations.
/// Comments are discarded. Throws SyntaxError on malformed input.
std::vector<Token> tokenize(std::string_view source);

} // namespace changeminer::detail
