#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace changeminer {

/// Source position range. Lines are 1-based, columns are 0-based byte offsets.
struct Span {
  int start_line = 0;
  int start_col = 0;
  int end_line = 0;
  int end_col = 0;

  bool contains(const Span &other) const;
  Span merged(const Span &other) const;
  friend bool operator==(const Span &, const Span &) = default;
};

enum class SyntaxKind : std::uint8_t {
  Module,
  FunctionDef,
  ClassDef,
  Decorators,
  Arguments,
  Arg,
  Bases,
  Body,
  OrElse,
  FinalBody,
  Return,
  Delete,
  Assign,
  AugAssign,
  AnnAssign,
  For,
  While,
  If,
  With,
  WithItem,
  Raise,
  Try,
  ExceptHandler,
  Assert,
  Import,
  ImportFrom,
  Alias,
  Global,
  Nonlocal,
  ExprStmt,
  Pass,
  Break,
  Continue,
  Match,
  MatchCase,
  BoolOp,
  BinOp,
  UnaryOp,
  Lambda,
  IfExp,
  Dict,
  Set,
  List,
  Tuple,
  ListComp,
  SetComp,
  DictComp,
  GeneratorExp,
  Comprehension,
  Await,
  Yield,
  YieldFrom,
  Compare,
  Call,
  Keyword,
  Starred,
  DoubleStarred,
  Attribute,
  Subscript,
  Slice,
  Name,
  Literal,
  NamedExpr,
};

std::string_view to_string(SyntaxKind kind);

/// One node of a NormalizedAst. Nodes live in a flat preorder array; `parent`
/// and `children` are indices into that array.
struct AstNode {
  SyntaxKind kind = SyntaxKind::Module;
  std::string label;
  std::vector<int> children;
  int parent = -1;
  Span span;
  int size = 1;   // nodes in the subtree rooted here
  int height = 1; // leaves have height 1
};

/// Rooted syntax tree stored in preorder: node 0 is the root and every subtree
/// occupies the contiguous index range [i, i + size).
class NormalizedAst {
public:
  NormalizedAst() = default;

  const AstNode &node(int id) const { return nodes_.at(static_cast<size_t>(id)); }
  const std::vector<AstNode> &nodes() const { return nodes_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  bool empty() const { return nodes_.empty(); }
  int root() const { return 0; }

  bool is_leaf(int id) const { return node(id).children.empty(); }
  bool is_descendant(int id, int ancestor) const {
    return id > ancestor && id < ancestor + node(ancestor).size;
  }

  /// Copies the subtree rooted at `id`, omitting subtrees whose roots satisfy
  /// `skip` (the root itself is never skipped).
  template <class Pred> NormalizedAst subtree(int id, Pred skip) const;
  NormalizedAst subtree(int id) const {
    return subtree(id, [](const AstNode &) { return false; });
  }

  /// Structural equality on kind, label and ordered children. Spans ignored.
  bool same_shape(const NormalizedAst &other) const;
  bool same_subtree(int id, const NormalizedAst &other, int other_id) const;

  /// S-expression dump, e.g. `Module[Assign[Name("x"), Literal("1")]]`.
  std::string to_sexpr(int id = 0) const;

  /// Builder interface used by the parser and `subtree`. Nodes may be added
  /// in any order; `finalize` renumbers them into preorder rooted at `root`.
  int add_node(SyntaxKind kind, std::string label, std::vector<int> children, Span span);
  void finalize(int root);

private:
  std::vector<AstNode> nodes_;
};

template <class Pred> NormalizedAst NormalizedAst::subtree(int id, Pred skip) const {
  NormalizedAst out;
  // Iterative copy; children are appended after their parents, so the
  // resulting array is already in preorder.
  struct Frame {
    int src;
    int dst_parent;
  };
  std::vector<Frame> stack{{id, -1}};
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    const AstNode &n = node(f.src);
    int dst = static_cast<int>(out.nodes_.size());
    out.nodes_.push_back(AstNode{n.kind, n.label, {}, f.dst_parent, n.span, 1, 1});
    if (f.dst_parent >= 0)
      out.nodes_[static_cast<size_t>(f.dst_parent)].children.push_back(dst);
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) {
      if (!skip(node(*it)))
        stack.push_back({*it, dst});
    }
  }
  out.finalize(0);
  return out;
}

/// Raised by `parse_source` on input outside the supported grammar.
class SyntaxError : public std::runtime_error {
public:
  SyntaxError(int line, const std::string &message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line),
        message_(message) {}
  int line() const { return line_; }
  const std::string &message() const { return message_; }

private:
  int line_;
  std::string message_;
};

} // namespace changeminer
