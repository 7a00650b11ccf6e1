// Recursive-descent parser for the Python 3 grammar (3.8 baseline plus
// parenthesized context managers and `match`). Produces a NormalizedAst;
// type annotations are parsed and discarded.

#include "changeminer/source_frontend.hpp"

#include "tokenizer.hpp"

#include <array>
#include <string_view>

namespace changeminer {
namespace {

using detail::Token;
using detail::TokenType;

constexpr std::array<std::string_view, 35> kKeywords = {
    "False",  "None",     "True",  "and",    "as",     "assert", "async",
    "await",  "break",    "class", "continue", "def",  "del",    "elif",
    "else",   "except",   "finally", "for",  "from",   "global", "if",
    "import", "in",       "is",    "lambda", "nonlocal", "not",  "or",
    "pass",   "raise",    "return", "try",   "while",  "with",   "yield"};

bool is_keyword(std::string_view s) {
  for (auto k : kKeywords)
    if (k == s)
      return true;
  return false;
}

class Parser {
public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  NormalizedAst parse_module() {
    std::vector<int> body;
    while (!at(TokenType::End)) {
      if (at(TokenType::Newline)) {
        advance();
        continue;
      }
      parse_statement(body);
    }
    const Token &end = toks_.back();
    int root = ast_.add_node(SyntaxKind::Module, "", std::move(body),
                             Span{1, 0, end.line, end.col});
    ast_.finalize(root);
    return std::move(ast_);
  }

private:
  // ---- token helpers -------------------------------------------------------

  const Token &peek(size_t k = 0) const {
    size_t i = std::min(pos_ + k, toks_.size() - 1);
    return toks_[i];
  }
  bool at(TokenType t) const { return peek().type == t; }
  bool at_op(std::string_view op, size_t k = 0) const {
    return peek(k).type == TokenType::Op && peek(k).text == op;
  }
  bool at_kw(std::string_view kw, size_t k = 0) const {
    return peek(k).type == TokenType::Name && peek(k).text == kw;
  }
  bool at_identifier(size_t k = 0) const {
    return peek(k).type == TokenType::Name && !is_keyword(peek(k).text);
  }

  const Token &advance() {
    const Token &t = toks_[pos_];
    if (t.type != TokenType::End)
      ++pos_;
    if (t.type != TokenType::Newline && t.type != TokenType::Indent &&
        t.type != TokenType::Dedent) {
      last_line_ = t.end_line;
      last_col_ = t.end_col;
    }
    return t;
  }

  [[noreturn]] void fail(const std::string &msg = "invalid syntax") const {
    throw SyntaxError(peek().line, msg);
  }

  void expect_op(std::string_view op) {
    if (!at_op(op))
      fail("expected '" + std::string(op) + "'");
    advance();
  }
  void expect_kw(std::string_view kw) {
    if (!at_kw(kw))
      fail("expected '" + std::string(kw) + "'");
    advance();
  }
  std::string expect_identifier() {
    if (!at_identifier())
      fail("expected identifier");
    return advance().text;
  }
  void expect(TokenType t, const char *what) {
    if (!at(t))
      fail(std::string("expected ") + what);
    advance();
  }

  // ---- node helpers --------------------------------------------------------

  size_t mark() const { return pos_; }

  int make(SyntaxKind kind, std::string label, std::vector<int> children, size_t start) {
    const Token &s = toks_[start];
    return ast_.add_node(kind, std::move(label), std::move(children),
                         Span{s.line, s.col, last_line_, last_col_});
  }

  const AstNode &raw(int id) const { return ast_.nodes()[static_cast<size_t>(id)]; }

  void validate_target(int id, bool allow_unpack = true) const {
    const AstNode &n = raw(id);
    switch (n.kind) {
    case SyntaxKind::Name:
    case SyntaxKind::Attribute:
    case SyntaxKind::Subscript:
      return;
    case SyntaxKind::Starred:
    case SyntaxKind::Tuple:
    case SyntaxKind::List:
      if (!allow_unpack)
        break;
      for (int c : n.children)
        validate_target(c, true);
      return;
    default:
      break;
    }
    throw SyntaxError(n.span.start_line,
                      "cannot assign to " + std::string(to_string(n.kind)));
  }

  // ---- statements ----------------------------------------------------------

  void parse_statement(std::vector<int> &out) {
    if (peek().type == TokenType::Name) {
      const std::string &w = peek().text;
      if (w == "if")
        return out.push_back(parse_if());
      if (w == "while")
        return out.push_back(parse_while());
      if (w == "for")
        return out.push_back(parse_for(mark()));
      if (w == "try")
        return out.push_back(parse_try());
      if (w == "with")
        return out.push_back(parse_with(mark()));
      if (w == "def")
        return out.push_back(parse_funcdef(mark(), -1));
      if (w == "class")
        return out.push_back(parse_classdef(mark(), -1));
      if (w == "async")
        return out.push_back(parse_async(mark(), -1));
      if (w == "match") {
        int m = try_parse_match();
        if (m >= 0)
          return out.push_back(m);
      }
    }
    if (at_op("@"))
      return out.push_back(parse_decorated());
    parse_simple_statements(out);
  }

  void parse_simple_statements(std::vector<int> &out) {
    while (true) {
      out.push_back(parse_small_statement());
      if (at_op(";")) {
        advance();
        if (at(TokenType::Newline))
          break;
        continue;
      }
      break;
    }
    expect(TokenType::Newline, "newline");
  }

  int parse_small_statement() {
    size_t start = mark();
    if (peek().type == TokenType::Name) {
      const std::string w = peek().text;
      if (w == "pass" || w == "break" || w == "continue") {
        advance();
        return make(w == "pass"    ? SyntaxKind::Pass
                    : w == "break" ? SyntaxKind::Break
                                   : SyntaxKind::Continue,
                    "", {}, start);
      }
      if (w == "return") {
        advance();
        std::vector<int> kids;
        if (!at_statement_end())
          kids.push_back(parse_testlist_star_expr());
        return make(SyntaxKind::Return, "", std::move(kids), start);
      }
      if (w == "raise") {
        advance();
        std::vector<int> kids;
        if (!at_statement_end()) {
          kids.push_back(parse_test());
          if (at_kw("from")) {
            advance();
            kids.push_back(parse_test());
          }
        }
        return make(SyntaxKind::Raise, "", std::move(kids), start);
      }
      if (w == "global" || w == "nonlocal") {
        advance();
        std::string names = expect_identifier();
        while (at_op(",")) {
          advance();
          names += "," + expect_identifier();
        }
        return make(w == "global" ? SyntaxKind::Global : SyntaxKind::Nonlocal, names, {}, start);
      }
      if (w == "del") {
        advance();
        int targets = parse_exprlist();
        std::vector<int> kids;
        if (raw(targets).kind == SyntaxKind::Tuple && raw(targets).span.start_line != 0)
          kids = raw(targets).children;
        else
          kids.push_back(targets);
        return make(SyntaxKind::Delete, "", std::move(kids), start);
      }
      if (w == "assert") {
        advance();
        std::vector<int> kids{parse_test()};
        if (at_op(",")) {
          advance();
          kids.push_back(parse_test());
        }
        return make(SyntaxKind::Assert, "", std::move(kids), start);
      }
      if (w == "import")
        return parse_import();
      if (w == "from")
        return parse_from_import();
    }
    return parse_expr_statement();
  }

  bool at_statement_end() const { return at(TokenType::Newline) || at_op(";"); }

  int parse_import() {
    size_t start = mark();
    expect_kw("import");
    std::vector<int> aliases;
    do {
      if (!aliases.empty())
        advance(); // ','
      size_t s = mark();
      std::string name = parse_dotted_name();
      if (at_kw("as")) {
        advance();
        name += " as " + expect_identifier();
      }
      aliases.push_back(make(SyntaxKind::Alias, name, {}, s));
    } while (at_op(","));
    return make(SyntaxKind::Import, "", std::move(aliases), start);
  }

  std::string parse_dotted_name() {
    std::string name = expect_identifier();
    while (at_op(".")) {
      advance();
      name += "." + expect_identifier();
    }
    return name;
  }

  int parse_from_import() {
    size_t start = mark();
    expect_kw("from");
    std::string module;
    while (at_op(".") || at_op("...")) {
      module += advance().text;
    }
    if (!at_kw("import"))
      module += parse_dotted_name();
    if (module.empty())
      fail();
    expect_kw("import");
    std::vector<int> aliases;
    if (at_op("*")) {
      size_t s = mark();
      advance();
      aliases.push_back(make(SyntaxKind::Alias, "*", {}, s));
    } else {
      bool paren = at_op("(");
      if (paren)
        advance();
      while (true) {
        size_t s = mark();
        std::string name = expect_identifier();
        if (at_kw("as")) {
          advance();
          name += " as " + expect_identifier();
        }
        aliases.push_back(make(SyntaxKind::Alias, name, {}, s));
        if (!at_op(","))
          break;
        advance();
        if (paren && at_op(")"))
          break;
      }
      if (paren)
        expect_op(")");
    }
    return make(SyntaxKind::ImportFrom, module, std::move(aliases), start);
  }

  static constexpr std::array<std::string_view, 13> kAugOps = {
      "+=", "-=", "*=", "/=", "//=", "%=", "@=", "&=", "|=", "^=", ">>=", "<<=", "**="};

  int parse_expr_statement() {
    size_t start = mark();
    if (at_kw("yield")) {
      int y = parse_yield_expr();
      return make(SyntaxKind::ExprStmt, "", {y}, start);
    }
    int first = parse_testlist_star_expr();
    if (at_op(":")) {
      advance();
      validate_target(first, false);
      parse_test(); // annotation, discarded
      std::vector<int> kids{first};
      if (at_op("=")) {
        advance();
        kids.push_back(at_kw("yield") ? parse_yield_expr() : parse_testlist_star_expr());
      }
      return make(SyntaxKind::AnnAssign, "", std::move(kids), start);
    }
    if (peek().type == TokenType::Op) {
      for (auto op : kAugOps) {
        if (peek().text == op) {
          validate_target(first, false);
          advance();
          int value = at_kw("yield") ? parse_yield_expr() : parse_testlist();
          return make(SyntaxKind::AugAssign, std::string(op.substr(0, op.size() - 1)),
                      {first, value}, start);
        }
      }
    }
    if (at_op("=")) {
      std::vector<int> parts{first};
      while (at_op("=")) {
        advance();
        parts.push_back(at_kw("yield") ? parse_yield_expr() : parse_testlist_star_expr());
      }
      for (size_t i = 0; i + 1 < parts.size(); ++i)
        validate_target(parts[i]);
      return make(SyntaxKind::Assign, "", std::move(parts), start);
    }
    return make(SyntaxKind::ExprStmt, "", {first}, start);
  }

  int parse_suite(SyntaxKind kind) {
    expect_op(":");
    std::vector<int> stmts;
    size_t start;
    if (at(TokenType::Newline)) {
      advance();
      expect(TokenType::Indent, "an indented block");
      start = mark();
      while (!at(TokenType::Dedent) && !at(TokenType::End))
        parse_statement(stmts);
      int node = make(kind, "", std::move(stmts), start);
      if (at(TokenType::Dedent))
        advance();
      return node;
    }
    start = mark();
    parse_simple_statements(stmts);
    return make(kind, "", std::move(stmts), start);
  }

  int parse_if() {
    size_t start = mark();
    advance(); // 'if' or 'elif'
    int test = parse_namedexpr_test();
    int body = parse_suite(SyntaxKind::Body);
    std::vector<int> kids{test, body};
    if (at_kw("elif")) {
      size_t s = mark();
      int nested = parse_if();
      kids.push_back(make(SyntaxKind::OrElse, "", {nested}, s));
    } else if (at_kw("else")) {
      advance();
      kids.push_back(parse_suite(SyntaxKind::OrElse));
    }
    return make(SyntaxKind::If, "", std::move(kids), start);
  }

  int parse_while() {
    size_t start = mark();
    advance();
    int test = parse_namedexpr_test();
    std::vector<int> kids{test, parse_suite(SyntaxKind::Body)};
    if (at_kw("else")) {
      advance();
      kids.push_back(parse_suite(SyntaxKind::OrElse));
    }
    return make(SyntaxKind::While, "", std::move(kids), start);
  }

  int parse_for(size_t start) {
    expect_kw("for");
    int target = parse_exprlist();
    validate_target(target);
    expect_kw("in");
    int iter = parse_testlist();
    std::vector<int> kids{target, iter, parse_suite(SyntaxKind::Body)};
    if (at_kw("else")) {
      advance();
      kids.push_back(parse_suite(SyntaxKind::OrElse));
    }
    return make(SyntaxKind::For, "", std::move(kids), start);
  }

  int parse_try() {
    size_t start = mark();
    advance();
    std::vector<int> kids{parse_suite(SyntaxKind::Body)};
    bool handlers = false;
    while (at_kw("except")) {
      handlers = true;
      size_t s = mark();
      advance();
      std::vector<int> hk;
      if (!at_op(":")) {
        hk.push_back(parse_test());
        if (at_kw("as")) {
          advance();
          size_t ns = mark();
          hk.push_back(make(SyntaxKind::Name, expect_identifier(), {}, ns));
        }
      }
      hk.push_back(parse_suite(SyntaxKind::Body));
      kids.push_back(make(SyntaxKind::ExceptHandler, "", std::move(hk), s));
    }
    if (handlers && at_kw("else")) {
      advance();
      kids.push_back(parse_suite(SyntaxKind::OrElse));
    }
    if (at_kw("finally")) {
      advance();
      kids.push_back(parse_suite(SyntaxKind::FinalBody));
    } else if (!handlers) {
      fail("expected 'except' or 'finally' block");
    }
    return make(SyntaxKind::Try, "", std::move(kids), start);
  }

  int parse_with_item() {
    size_t s = mark();
    std::vector<int> kids{parse_test()};
    if (at_kw("as")) {
      advance();
      int target = parse_expr();
      validate_target(target);
      kids.push_back(target);
    }
    return make(SyntaxKind::WithItem, "", std::move(kids), s);
  }

  int parse_with(size_t start) {
    expect_kw("with");
    std::vector<int> items;
    bool parsed = false;
    if (at_op("(")) {
      // Parenthesized form `with (a as b, c as d):`; falls back to treating
      // the parenthesis as part of an ordinary expression.
      size_t save = pos_;
      auto save_line = last_line_;
      auto save_col = last_col_;
      try {
        advance();
        while (!at_op(")")) {
          items.push_back(parse_with_item());
          if (!at_op(","))
            break;
          advance();
        }
        expect_op(")");
        if (!at_op(":"))
          fail();
        parsed = true;
      } catch (const SyntaxError &) {
        pos_ = save;
        last_line_ = save_line;
        last_col_ = save_col;
        items.clear();
      }
    }
    if (!parsed) {
      items.push_back(parse_with_item());
      while (at_op(",")) {
        advance();
        items.push_back(parse_with_item());
      }
    }
    items.push_back(parse_suite(SyntaxKind::Body));
    return make(SyntaxKind::With, "", std::move(items), start);
  }

  int parse_async(size_t start, int decorators) {
    expect_kw("async");
    if (at_kw("def"))
      return parse_funcdef(start, decorators);
    if (decorators >= 0)
      fail();
    if (at_kw("for"))
      return parse_for(start);
    if (at_kw("with"))
      return parse_with(start);
    fail();
  }

  int parse_decorated() {
    size_t start = mark();
    std::vector<int> decos;
    while (at_op("@")) {
      advance();
      decos.push_back(parse_namedexpr_test());
      expect(TokenType::Newline, "newline");
    }
    int deco_node = make(SyntaxKind::Decorators, "", std::move(decos), start);
    if (at_kw("def"))
      return parse_funcdef(start, deco_node);
    if (at_kw("class"))
      return parse_classdef(start, deco_node);
    if (at_kw("async"))
      return parse_async(start, deco_node);
    fail();
  }

  int parse_funcdef(size_t start, int decorators) {
    expect_kw("def");
    std::string name = expect_identifier();
    size_t args_start = mark();
    expect_op("(");
    std::vector<int> params = parse_parameters(")", true);
    expect_op(")");
    int args = make(SyntaxKind::Arguments, "", std::move(params), args_start);
    if (at_op("->")) {
      advance();
      parse_test(); // return annotation, discarded
    }
    std::vector<int> kids;
    if (decorators >= 0)
      kids.push_back(decorators);
    kids.push_back(args);
    kids.push_back(parse_suite(SyntaxKind::Body));
    return make(SyntaxKind::FunctionDef, name, std::move(kids), start);
  }

  // Parameter list up to (not including) `closer`.
  std::vector<int> parse_parameters(std::string_view closer, bool annotations) {
    std::vector<int> params;
    while (!at_op(closer)) {
      size_t s = mark();
      if (at_op("/")) {
        advance();
      } else if (at_op("*") || at_op("**")) {
        std::string prefix = advance().text;
        if (prefix == "*" && (at_op(",") || at_op(closer))) {
          // bare '*' marker
        } else {
          std::string name = prefix + expect_identifier();
          if (annotations && at_op(":")) {
            advance();
            parse_test();
          }
          params.push_back(make(SyntaxKind::Arg, name, {}, s));
        }
      } else {
        std::string name = expect_identifier();
        if (annotations && at_op(":")) {
          advance();
          parse_test();
        }
        std::vector<int> kids;
        if (at_op("=")) {
          advance();
          kids.push_back(parse_test());
        }
        params.push_back(make(SyntaxKind::Arg, name, std::move(kids), s));
      }
      if (!at_op(","))
        break;
      advance();
    }
    return params;
  }

  int parse_classdef(size_t start, int decorators) {
    expect_kw("class");
    std::string name = expect_identifier();
    std::vector<int> kids;
    if (decorators >= 0)
      kids.push_back(decorators);
    if (at_op("(")) {
      size_t s = mark();
      advance();
      std::vector<int> bases = parse_arglist();
      expect_op(")");
      kids.push_back(make(SyntaxKind::Bases, "", std::move(bases), s));
    }
    kids.push_back(parse_suite(SyntaxKind::Body));
    return make(SyntaxKind::ClassDef, name, std::move(kids), start);
  }

  int try_parse_match() {
    size_t start = mark();
    size_t save = pos_;
    auto save_line = last_line_;
    auto save_col = last_col_;
    int subject = -1;
    try {
      advance(); // 'match'
      subject = parse_testlist_star_expr();
      expect_op(":");
      expect(TokenType::Newline, "newline");
      expect(TokenType::Indent, "an indented block");
      if (!at_kw("case"))
        fail();
    } catch (const SyntaxError &) {
      pos_ = save;
      last_line_ = save_line;
      last_col_ = save_col;
      return -1;
    }
    std::vector<int> kids{subject};
    while (at_kw("case")) {
      size_t cs = mark();
      advance();
      std::vector<int> ck{parse_pattern()};
      if (at_kw("as")) {
        advance();
        size_t ns = mark();
        ck.push_back(make(SyntaxKind::Name, expect_identifier(), {}, ns));
      }
      if (at_kw("if")) {
        advance();
        ck.push_back(parse_namedexpr_test());
      }
      ck.push_back(parse_suite(SyntaxKind::Body));
      kids.push_back(make(SyntaxKind::MatchCase, "", std::move(ck), cs));
    }
    expect(TokenType::Dedent, "end of match block");
    return make(SyntaxKind::Match, "", std::move(kids), start);
  }

  // Case patterns share expression syntax but stop before a guard `if`.
  int parse_pattern() {
    size_t start = mark();
    std::vector<int> items{at_op("*") ? parse_star_expr() : parse_or_test()};
    bool tuple = false;
    while (at_op(",")) {
      tuple = true;
      advance();
      if (at_op(":") || at_kw("if") || at_kw("as"))
        break;
      items.push_back(at_op("*") ? parse_star_expr() : parse_or_test());
    }
    if (!tuple)
      return items[0];
    return make(SyntaxKind::Tuple, "", std::move(items), start);
  }

  // ---- expressions ---------------------------------------------------------

  int parse_yield_expr() {
    size_t start = mark();
    expect_kw("yield");
    if (at_kw("from")) {
      advance();
      int v = parse_test();
      return make(SyntaxKind::YieldFrom, "", {v}, start);
    }
    std::vector<int> kids;
    if (!at_statement_end() && !at_op(")") && !at_op("]") && !at_op("}") && !at_op("="))
      kids.push_back(parse_testlist_star_expr());
    return make(SyntaxKind::Yield, "", std::move(kids), start);
  }

  int parse_testlist_star_expr() {
    size_t start = mark();
    std::vector<int> items{at_op("*") ? parse_star_expr() : parse_test()};
    bool tuple = false;
    while (at_op(",")) {
      tuple = true;
      advance();
      if (!starts_expression())
        break;
      items.push_back(at_op("*") ? parse_star_expr() : parse_test());
    }
    if (!tuple)
      return items[0];
    return make(SyntaxKind::Tuple, "", std::move(items), start);
  }

  int parse_testlist() {
    size_t start = mark();
    std::vector<int> items{parse_test()};
    bool tuple = false;
    while (at_op(",")) {
      tuple = true;
      advance();
      if (!starts_expression())
        break;
      items.push_back(parse_test());
    }
    if (!tuple)
      return items[0];
    return make(SyntaxKind::Tuple, "", std::move(items), start);
  }

  int parse_exprlist() {
    size_t start = mark();
    std::vector<int> items{at_op("*") ? parse_star_expr() : parse_expr()};
    bool tuple = false;
    while (at_op(",")) {
      tuple = true;
      advance();
      if (!starts_expression())
        break;
      items.push_back(at_op("*") ? parse_star_expr() : parse_expr());
    }
    if (!tuple)
      return items[0];
    return make(SyntaxKind::Tuple, "", std::move(items), start);
  }

  bool starts_expression() const {
    const Token &t = peek();
    switch (t.type) {
    case TokenType::Name:
      if (!is_keyword(t.text))
        return true;
      return t.text == "None" || t.text == "True" || t.text == "False" || t.text == "not" ||
             t.text == "lambda" || t.text == "await" || t.text == "yield";
    case TokenType::Number:
    case TokenType::String:
      return true;
    case TokenType::Op:
      return t.text == "(" || t.text == "[" || t.text == "{" || t.text == "-" ||
             t.text == "+" || t.text == "~" || t.text == "..." || t.text == "*" ||
             t.text == "**";
    default:
      return false;
    }
  }

  int parse_star_expr() {
    size_t start = mark();
    expect_op("*");
    int v = parse_expr();
    return make(SyntaxKind::Starred, "", {v}, start);
  }

  int parse_namedexpr_test() {
    if (at_identifier() && at_op(":=", 1)) {
      size_t start = mark();
      int target = make_name();
      advance(); // ':='
      int value = parse_test();
      return make(SyntaxKind::NamedExpr, "", {target, value}, start);
    }
    return parse_test();
  }

  int make_name() {
    size_t s = mark();
    std::string id = expect_identifier();
    return make(SyntaxKind::Name, id, {}, s);
  }

  int parse_test() {
    if (at_kw("lambda"))
      return parse_lambda();
    size_t start = mark();
    int body = parse_or_test();
    if (at_kw("if")) {
      advance();
      int cond = parse_or_test();
      expect_kw("else");
      int orelse = parse_test();
      return make(SyntaxKind::IfExp, "", {body, cond, orelse}, start);
    }
    return body;
  }

  int parse_lambda() {
    size_t start = mark();
    expect_kw("lambda");
    size_t as = mark();
    std::vector<int> params = parse_parameters(":", false);
    int args = make(SyntaxKind::Arguments, "", std::move(params), as);
    expect_op(":");
    int body = parse_test();
    return make(SyntaxKind::Lambda, "", {args, body}, start);
  }

  int parse_or_test() {
    size_t start = mark();
    std::vector<int> items{parse_and_test()};
    while (at_kw("or")) {
      advance();
      items.push_back(parse_and_test());
    }
    if (items.size() == 1)
      return items[0];
    return make(SyntaxKind::BoolOp, "or", std::move(items), start);
  }

  int parse_and_test() {
    size_t start = mark();
    std::vector<int> items{parse_not_test()};
    while (at_kw("and")) {
      advance();
      items.push_back(parse_not_test());
    }
    if (items.size() == 1)
      return items[0];
    return make(SyntaxKind::BoolOp, "and", std::move(items), start);
  }

  int parse_not_test() {
    if (at_kw("not")) {
      size_t start = mark();
      advance();
      int v = parse_not_test();
      return make(SyntaxKind::UnaryOp, "not", {v}, start);
    }
    return parse_comparison();
  }

  std::string comparison_operator() {
    if (peek().type == TokenType::Op) {
      const std::string &t = peek().text;
      if (t == "<" || t == ">" || t == "==" || t == ">=" || t == "<=" || t == "!=") {
        advance();
        return t;
      }
      return "";
    }
    if (at_kw("in")) {
      advance();
      return "in";
    }
    if (at_kw("not") && at_kw("in", 1)) {
      advance();
      advance();
      return "not in";
    }
    if (at_kw("is")) {
      advance();
      if (at_kw("not")) {
        advance();
        return "is not";
      }
      return "is";
    }
    return "";
  }

  int parse_comparison() {
    size_t start = mark();
    std::vector<int> items{parse_expr()};
    std::string ops;
    while (true) {
      std::string op = comparison_operator();
      if (op.empty())
        break;
      if (!ops.empty())
        ops += ",";
      ops += op;
      items.push_back(parse_expr());
    }
    if (items.size() == 1)
      return items[0];
    return make(SyntaxKind::Compare, ops, std::move(items), start);
  }

  template <class Next>
  int parse_binary(std::initializer_list<std::string_view> ops, Next next) {
    size_t start = mark();
    int left = (this->*next)();
    while (peek().type == TokenType::Op) {
      std::string_view found;
      for (auto op : ops)
        if (peek().text == op)
          found = op;
      if (found.empty())
        break;
      advance();
      int right = (this->*next)();
      left = make(SyntaxKind::BinOp, std::string(found), {left, right}, start);
    }
    return left;
  }

  int parse_expr() { return parse_binary({"|"}, &Parser::parse_xor); }
  int parse_xor() { return parse_binary({"^"}, &Parser::parse_and); }
  int parse_and() { return parse_binary({"&"}, &Parser::parse_shift); }
  int parse_shift() { return parse_binary({"<<", ">>"}, &Parser::parse_arith); }
  int parse_arith() { return parse_binary({"+", "-"}, &Parser::parse_term); }
  int parse_term() { return parse_binary({"*", "/", "%", "//", "@"}, &Parser::parse_factor); }

  int parse_factor() {
    if (at_op("+") || at_op("-") || at_op("~")) {
      size_t start = mark();
      std::string op = advance().text;
      int v = parse_factor();
      return make(SyntaxKind::UnaryOp, op, {v}, start);
    }
    return parse_power();
  }

  int parse_power() {
    size_t start = mark();
    int base;
    if (at_kw("await")) {
      advance();
      int v = parse_primary();
      base = make(SyntaxKind::Await, "", {v}, start);
    } else {
      base = parse_primary();
    }
    if (at_op("**")) {
      advance();
      int exp = parse_factor();
      return make(SyntaxKind::BinOp, "**", {base, exp}, start);
    }
    return base;
  }

  int parse_primary() {
    size_t start = mark();
    int node = parse_atom();
    while (true) {
      if (at_op("(")) {
        advance();
        std::vector<int> kids{node};
        auto args = parse_arglist();
        kids.insert(kids.end(), args.begin(), args.end());
        expect_op(")");
        node = make(SyntaxKind::Call, "", std::move(kids), start);
      } else if (at_op("[")) {
        advance();
        int index = parse_subscript_list();
        expect_op("]");
        node = make(SyntaxKind::Subscript, "", {node, index}, start);
      } else if (at_op(".")) {
        advance();
        std::string attr = expect_identifier();
        node = make(SyntaxKind::Attribute, attr, {node}, start);
      } else {
        return node;
      }
    }
  }

  std::vector<int> parse_arglist() {
    std::vector<int> args;
    while (!at_op(")")) {
      size_t s = mark();
      if (at_op("*")) {
        advance();
        int v = parse_test();
        args.push_back(make(SyntaxKind::Starred, "", {v}, s));
      } else if (at_op("**")) {
        advance();
        int v = parse_test();
        args.push_back(make(SyntaxKind::DoubleStarred, "", {v}, s));
      } else if (at_identifier() && at_op("=", 1)) {
        std::string name = advance().text;
        advance();
        int v = parse_test();
        args.push_back(make(SyntaxKind::Keyword, name, {v}, s));
      } else {
        int v = parse_namedexpr_test();
        if (at_kw("for") || (at_kw("async") && at_kw("for", 1))) {
          std::vector<int> kids{v};
          parse_comprehension_clauses(kids);
          v = make(SyntaxKind::GeneratorExp, "", std::move(kids), s);
        }
        args.push_back(v);
      }
      if (!at_op(","))
        break;
      advance();
    }
    return args;
  }

  int parse_subscript_list() {
    size_t start = mark();
    std::vector<int> items{parse_subscript()};
    bool tuple = false;
    while (at_op(",")) {
      tuple = true;
      advance();
      if (at_op("]"))
        break;
      items.push_back(parse_subscript());
    }
    if (!tuple)
      return items[0];
    return make(SyntaxKind::Tuple, "", std::move(items), start);
  }

  int parse_subscript() {
    size_t start = mark();
    int lower = -1;
    if (!at_op(":")) {
      lower = at_op("*") ? parse_star_expr() : parse_namedexpr_test();
      if (!at_op(":"))
        return lower;
    }
    std::string mask = lower >= 0 ? "x:" : ":";
    std::vector<int> kids;
    if (lower >= 0)
      kids.push_back(lower);
    advance(); // ':'
    if (!at_op(":") && !at_op("]") && !at_op(",")) {
      kids.push_back(parse_test());
      mask += "x";
    }
    if (at_op(":")) {
      advance();
      mask += ":";
      if (!at_op("]") && !at_op(",")) {
        kids.push_back(parse_test());
        mask += "x";
      }
    }
    return make(SyntaxKind::Slice, mask, std::move(kids), start);
  }

  void parse_comprehension_clauses(std::vector<int> &out) {
    while (at_kw("for") || (at_kw("async") && at_kw("for", 1))) {
      size_t s = mark();
      if (at_kw("async"))
        advance();
      advance(); // 'for'
      int target = parse_exprlist();
      validate_target(target);
      expect_kw("in");
      std::vector<int> kids{target, parse_or_test()};
      while (at_kw("if")) {
        advance();
        kids.push_back(at_kw("lambda") ? parse_lambda() : parse_or_test());
      }
      out.push_back(make(SyntaxKind::Comprehension, "", std::move(kids), s));
    }
  }

  bool at_comprehension() const { return at_kw("for") || (at_kw("async") && at_kw("for", 1)); }

  int parse_atom() {
    size_t start = mark();
    const Token &t = peek();
    switch (t.type) {
    case TokenType::Number:
      advance();
      return make(SyntaxKind::Literal, t.text, {}, start);
    case TokenType::String: {
      std::string text = advance().text;
      while (at(TokenType::String))
        text += " " + advance().text;
      return make(SyntaxKind::Literal, text, {}, start);
    }
    case TokenType::Name:
      if (t.text == "None" || t.text == "True" || t.text == "False") {
        advance();
        return make(SyntaxKind::Literal, t.text, {}, start);
      }
      if (is_keyword(t.text))
        fail();
      advance();
      return make(SyntaxKind::Name, t.text, {}, start);
    case TokenType::Op:
      if (t.text == "...") {
        advance();
        return make(SyntaxKind::Literal, "...", {}, start);
      }
      if (t.text == "(")
        return parse_paren(start);
      if (t.text == "[")
        return parse_list(start);
      if (t.text == "{")
        return parse_brace(start);
      break;
    default:
      break;
    }
    fail();
  }

  int parse_paren(size_t start) {
    advance();
    if (at_op(")")) {
      advance();
      return make(SyntaxKind::Tuple, "", {}, start);
    }
    if (at_kw("yield")) {
      int y = parse_yield_expr();
      expect_op(")");
      return y;
    }
    int first = at_op("*") ? parse_star_expr() : parse_namedexpr_test();
    if (at_comprehension()) {
      std::vector<int> kids{first};
      parse_comprehension_clauses(kids);
      expect_op(")");
      return make(SyntaxKind::GeneratorExp, "", std::move(kids), start);
    }
    if (!at_op(",")) {
      expect_op(")");
      return first;
    }
    std::vector<int> items{first};
    while (at_op(",")) {
      advance();
      if (at_op(")"))
        break;
      items.push_back(at_op("*") ? parse_star_expr() : parse_namedexpr_test());
    }
    expect_op(")");
    return make(SyntaxKind::Tuple, "", std::move(items), start);
  }

  int parse_list(size_t start) {
    advance();
    if (at_op("]")) {
      advance();
      return make(SyntaxKind::List, "", {}, start);
    }
    int first = at_op("*") ? parse_star_expr() : parse_namedexpr_test();
    if (at_comprehension()) {
      std::vector<int> kids{first};
      parse_comprehension_clauses(kids);
      expect_op("]");
      return make(SyntaxKind::ListComp, "", std::move(kids), start);
    }
    std::vector<int> items{first};
    while (at_op(",")) {
      advance();
      if (at_op("]"))
        break;
      items.push_back(at_op("*") ? parse_star_expr() : parse_namedexpr_test());
    }
    expect_op("]");
    return make(SyntaxKind::List, "", std::move(items), start);
  }

  int parse_dict_entry(std::vector<int> &items) {
    // Returns 1 for `k: v`, 0 for `**m`.
    size_t s = mark();
    if (at_op("**")) {
      advance();
      int v = parse_expr();
      items.push_back(make(SyntaxKind::DoubleStarred, "", {v}, s));
      return 0;
    }
    items.push_back(parse_test());
    expect_op(":");
    items.push_back(parse_test());
    return 1;
  }

  int parse_brace(size_t start) {
    advance();
    if (at_op("}")) {
      advance();
      return make(SyntaxKind::Dict, "", {}, start);
    }
    bool is_dict = at_op("**");
    int first = -1;
    if (!is_dict) {
      first = at_op("*") ? parse_star_expr() : parse_namedexpr_test();
      is_dict = at_op(":");
    }
    if (is_dict) {
      std::vector<int> items;
      if (first >= 0) {
        items.push_back(first);
        expect_op(":");
        items.push_back(parse_test());
        if (at_comprehension()) {
          parse_comprehension_clauses(items);
          expect_op("}");
          return make(SyntaxKind::DictComp, "", std::move(items), start);
        }
      } else {
        parse_dict_entry(items);
      }
      while (at_op(",")) {
        advance();
        if (at_op("}"))
          break;
        parse_dict_entry(items);
      }
      expect_op("}");
      return make(SyntaxKind::Dict, "", std::move(items), start);
    }
    if (at_comprehension()) {
      std::vector<int> kids{first};
      parse_comprehension_clauses(kids);
      expect_op("}");
      return make(SyntaxKind::SetComp, "", std::move(kids), start);
    }
    std::vector<int> items{first};
    while (at_op(",")) {
      advance();
      if (at_op("}"))
        break;
      items.push_back(at_op("*") ? parse_star_expr() : parse_namedexpr_test());
    }
    expect_op("}");
    return make(SyntaxKind::Set, "", std::move(items), start);
  }

  std::vector<Token> toks_;
  size_t pos_ = 0;
  int last_line_ = 1;
  int last_col_ = 0;
  NormalizedAst ast_;
};

} // namespace

std::string decode_source(std::string_view bytes) {
  std::string out;
  out.reserve(bytes.size());
  size_t i = 0;
  if (bytes.substr(0, 3) == "\xEF\xBB\xBF")
    i = 3;
  static constexpr std::string_view kReplacement = "\xEF\xBF\xBD";
  while (i < bytes.size()) {
    auto c = static_cast<unsigned char>(bytes[i]);
    if (c == '\r') {
      out += '\n';
      i += (i + 1 < bytes.size() && bytes[i + 1] == '\n') ? 2 : 1;
      continue;
    }
    if (c < 0x80) {
      out += static_cast<char>(c);
      ++i;
      continue;
    }
    int len = (c & 0xE0) == 0xC0 ? 2 : (c & 0xF0) == 0xE0 ? 3 : (c & 0xF8) == 0xF0 ? 4 : 0;
    bool ok = len > 0 && i + static_cast<size_t>(len) <= bytes.size();
    if (ok) {
      for (int k = 1; k < len; ++k)
        if ((static_cast<unsigned char>(bytes[i + static_cast<size_t>(k)]) & 0xC0) != 0x80)
          ok = false;
    }
    if (ok) {
      // Reject overlong encodings and surrogates.
      unsigned cp = c & (0xFF >> (len + 1));
      for (int k = 1; k < len; ++k)
        cp = (cp << 6) | (static_cast<unsigned char>(bytes[i + static_cast<size_t>(k)]) & 0x3F);
      if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
          cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
        ok = false;
    }
    if (ok) {
      out.append(bytes.substr(i, static_cast<size_t>(len)));
      i += static_cast<size_t>(len);
    } else {
      out += kReplacement;
      ++i;
    }
  }
  return out;
}

NormalizedAst parse_source(std::string_view text) {
  std::string decoded = decode_source(text);
  return Parser(detail::tokenize(decoded)).parse_module();
}

} // namespace changeminer
