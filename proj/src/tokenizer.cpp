#include "tokenizer.hpp"

#include "changeminer/ast.hpp"

#include <array>
#include <cctype>

namespace changeminer::detail {
namespace {

bool is_name_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool is_name_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

bool is_string_prefix(std::string_view p) {
  if (p.empty() || p.size() > 2)
    return false;
  std::string lower;
  for (char c : p)
    lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  static constexpr std::array<std::string_view, 11> prefixes = {
      "r", "u", "b", "f", "br", "rb", "fr", "rf", "ur", "bu", "ub"};
  for (auto q : prefixes)
    if (lower == q)
      return lower != "ur" && lower != "bu" && lower != "ub";
  return false;
}

constexpr std::array<std::string_view, 4> kOps3 = {"**=", "//=", ">>=", "<<="};
constexpr std::array<std::string_view, 19> kOps2 = {"->", ":=", "**", "//", "<<", ">>", "<=",
                                                    ">=", "==", "!=", "+=", "-=", "*=", "/=",
                                                    "%=", "&=", "|=", "^=", "@="};
constexpr std::string_view kOps1 = "()[]{}:,;.+-*/%&|^~<>=@";

class Lexer {
public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    while (true) {
      if (at_line_start_ && parens_.empty()) {
        if (!handle_indentation())
          break;
      }
      if (pos_ >= src_.size())
        break;
      char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\f') {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n')
          ++pos_;
      } else if (c == '\\') {
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '\n') {
          pos_ += 2;
          new_line();
          if (pos_ >= src_.size())
            throw SyntaxError(line_, "unexpected EOF after line continuation");
        } else {
          throw SyntaxError(line_, "unexpected character after line continuation character");
        }
      } else if (c == '\n') {
        if (parens_.empty() && line_has_tokens_) {
          push(TokenType::Newline, "", line_, col(), line_, col() + 1);
          line_has_tokens_ = false;
        }
        ++pos_;
        new_line();
        at_line_start_ = parens_.empty();
      } else {
        lex_token();
      }
    }
    if (!parens_.empty())
      throw SyntaxError(line_, "unexpected EOF: unclosed bracket");
    if (line_has_tokens_)
      push(TokenType::Newline, "", line_, col(), line_, col());
    while (indents_.size() > 1) {
      indents_.pop_back();
      push(TokenType::Dedent, "", line_, 0, line_, 0);
    }
    push(TokenType::End, "", line_, col(), line_, col());
    return std::move(tokens_);
  }

private:
  int col() const { return static_cast<int>(pos_ - line_start_); }
  void new_line() {
    ++line_;
    line_start_ = pos_;
  }

  void push(TokenType t, std::string text, int l, int c, int el, int ec) {
    tokens_.push_back(Token{t, std::move(text), l, c, el, ec});
    if (t != TokenType::Newline && t != TokenType::Indent && t != TokenType::Dedent)
      line_has_tokens_ = true;
  }

  // Returns false at end of input.
  bool handle_indentation() {
    while (true) {
      int width = 0;
      while (pos_ < src_.size()) {
        char c = src_[pos_];
        if (c == ' ')
          ++width;
        else if (c == '\t')
          width = (width / 8 + 1) * 8;
        else if (c == '\f')
          width = 0;
        else
          break;
        ++pos_;
      }
      if (pos_ >= src_.size())
        return false;
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n')
          ++pos_;
        continue;
      }
      if (c == '\n') {
        ++pos_;
        new_line();
        continue;
      }
      at_line_start_ = false;
      if (width > indents_.back()) {
        indents_.push_back(width);
        push(TokenType::Indent, "", line_, 0, line_, col());
      } else {
        while (width < indents_.back()) {
          indents_.pop_back();
          push(TokenType::Dedent, "", line_, col(), line_, col());
        }
        if (width != indents_.back())
          throw SyntaxError(line_, "unindent does not match any outer indentation level");
      }
      return true;
    }
  }

  void lex_token() {
    const int l = line_;
    const int c0 = col();
    const size_t start = pos_;
    const auto ch = static_cast<unsigned char>(src_[pos_]);

    if (is_name_start(ch)) {
      size_t p = pos_;
      while (p < src_.size() && is_name_char(static_cast<unsigned char>(src_[p])))
        ++p;
      std::string_view word = src_.substr(pos_, p - pos_);
      if (p < src_.size() && (src_[p] == '\'' || src_[p] == '"') && is_string_prefix(word)) {
        pos_ = p;
        lex_string(start, l, c0);
        return;
      }
      pos_ = p;
      push(TokenType::Name, std::string(word), l, c0, l, col());
      return;
    }
    if (ch == '\'' || ch == '"') {
      lex_string(start, l, c0);
      return;
    }
    if (std::isdigit(ch) ||
        (ch == '.' && pos_ + 1 < src_.size() &&
         std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      lex_number();
      push(TokenType::Number, std::string(src_.substr(start, pos_ - start)), l, c0, l, col());
      return;
    }
    if (src_.substr(pos_, 3) == "...") {
      pos_ += 3;
      push(TokenType::Op, "...", l, c0, l, col());
      return;
    }
    for (auto op : kOps3)
      if (src_.substr(pos_, 3) == op) {
        pos_ += 3;
        push(TokenType::Op, std::string(op), l, c0, l, col());
        return;
      }
    for (auto op : kOps2)
      if (src_.substr(pos_, 2) == op) {
        pos_ += 2;
        push(TokenType::Op, std::string(op), l, c0, l, col());
        return;
      }
    if (kOps1.find(static_cast<char>(ch)) != std::string_view::npos) {
      char c = static_cast<char>(ch);
      if (c == '(' || c == '[' || c == '{') {
        parens_.push_back(c);
      } else if (c == ')' || c == ']' || c == '}') {
        char open = c == ')' ? '(' : c == ']' ? '[' : '{';
        if (parens_.empty() || parens_.back() != open)
          throw SyntaxError(l, std::string("unmatched '") + c + "'");
        parens_.pop_back();
      }
      ++pos_;
      push(TokenType::Op, std::string(1, c), l, c0, l, col());
      return;
    }
    throw SyntaxError(l, std::string("invalid character '") + static_cast<char>(ch) + "'");
  }

  void lex_number() {
    auto digit_run = [&](auto pred) {
      while (pos_ < src_.size() &&
             (pred(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
    };
    if (src_[pos_] == '0' && pos_ + 1 < src_.size() &&
        std::string_view("xXoObB").find(src_[pos_ + 1]) != std::string_view::npos) {
      pos_ += 2;
      digit_run([](unsigned char c) { return std::isxdigit(c) != 0; });
      return;
    }
    digit_run([](unsigned char c) { return std::isdigit(c) != 0; });
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      digit_run([](unsigned char c) { return std::isdigit(c) != 0; });
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      size_t save = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-'))
        ++pos_;
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
        digit_run([](unsigned char c) { return std::isdigit(c) != 0; });
      else
        pos_ = save;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'j' || src_[pos_] == 'J'))
      ++pos_;
  }

  // pos_ points at the opening quote; `start` is the prefix start.
  void lex_string(size_t start, int l, int c0) {
    const char q = src_[pos_];
    const bool triple = src_.substr(pos_, 3) == std::string(3, q);
    pos_ += triple ? 3 : 1;
    while (true) {
      if (pos_ >= src_.size())
        throw SyntaxError(l, triple ? "EOF while scanning triple-quoted string literal"
                                    : "EOL while scanning string literal");
      char c = src_[pos_];
      if (c == '\\') {
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '\n') {
          pos_ += 2;
          new_line();
        } else {
          pos_ += 2;
        }
        continue;
      }
      if (c == '\n') {
        if (!triple)
          throw SyntaxError(line_, "EOL while scanning string literal");
        ++pos_;
        new_line();
        continue;
      }
      if (c == q) {
        if (!triple) {
          ++pos_;
          break;
        }
        if (src_.substr(pos_, 3) == std::string(3, q)) {
          pos_ += 3;
          break;
        }
      }
      ++pos_;
    }
    push(TokenType::String, std::string(src_.substr(start, pos_ - start)), l, c0, line_, col());
  }

  std::string_view src_;
  size_t pos_ = 0;
  size_t line_start_ = 0;
  int line_ = 1;
  bool at_line_start_ = true;
  bool line_has_tokens_ = false;
  std::vector<char> parens_;
  std::vector<int> indents_{0};
  std::vector<Token> tokens_;
};

} // namespace

std::vector<Token> tokenize(std::string_view source) { return Lexer(source).run(); }

} // namespace changeminer::detail
