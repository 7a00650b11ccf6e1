#include "changeminer/ast.hpp"

#include <algorithm>
#include <array>
#include <tuple>

namespace changeminer {

bool Span::contains(const Span &o) const {
  return std::tie(start_line, start_col) <= std::tie(o.start_line, o.start_col) &&
         std::tie(o.end_line, o.end_col) <= std::tie(end_line, end_col);
}

Span Span::merged(const Span &o) const {
  Span s = *this;
  if (std::tie(o.start_line, o.start_col) < std::tie(s.start_line, s.start_col)) {
    s.start_line = o.start_line;
    s.start_col = o.start_col;
  }
  if (std::tie(o.end_line, o.end_col) > std::tie(s.end_line, s.end_col)) {
    s.end_line = o.end_line;
    s.end_col = o.end_col;
  }
  return s;
}

std::string_view to_string(SyntaxKind kind) {
  static constexpr std::array<std::string_view, 63> names = {
      "Module",       "FunctionDef",  "ClassDef",   "Decorators", "Arguments",    "Arg",
      "Bases",        "Body",       "OrElse",     "FinalBody",    "Return",
      "Delete",       "Assign",       "AugAssign",  "AnnAssign",  "For",          "While",
      "If",           "With",         "WithItem",   "Raise",      "Try",          "ExceptHandler",
      "Assert",       "Import",       "ImportFrom", "Alias",      "Global",       "Nonlocal",
      "ExprStmt",     "Pass",         "Break",      "Continue",   "Match",        "MatchCase",
      "BoolOp",       "BinOp",        "UnaryOp",    "Lambda",     "IfExp",        "Dict",
      "Set",          "List",         "Tuple",      "ListComp",   "SetComp",      "DictComp",
      "GeneratorExp", "Comprehension", "Await",     "Yield",      "YieldFrom",    "Compare",
      "Call",         "Keyword",      "Starred",    "DoubleStarred", "Attribute", "Subscript",
      "Slice",        "Name",         "Literal",    "NamedExpr",
  };
  return names.at(static_cast<size_t>(kind));
}

int NormalizedAst::add_node(SyntaxKind kind, std::string label, std::vector<int> children,
                            Span span) {
  nodes_.push_back(AstNode{kind, std::move(label), std::move(children), -1, span, 1, 1});
  return static_cast<int>(nodes_.size()) - 1;
}

void NormalizedAst::finalize(int root) {
  if (nodes_.empty())
    return;
  std::vector<AstNode> out;
  out.reserve(nodes_.size());
  std::vector<int> remap(nodes_.size(), -1);
  struct Frame {
    int src;
    int parent;
  };
  std::vector<Frame> stack{{root, -1}};
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    int dst = static_cast<int>(out.size());
    remap[static_cast<size_t>(f.src)] = dst;
    AstNode n = nodes_[static_cast<size_t>(f.src)];
    n.parent = f.parent;
    std::vector<int> old_children = std::move(n.children);
    n.children.clear();
    out.push_back(std::move(n));
    if (f.parent >= 0)
      out[static_cast<size_t>(f.parent)].children.push_back(dst);
    for (auto it = old_children.rbegin(); it != old_children.rend(); ++it)
      stack.push_back({*it, dst});
  }
  // Sizes, heights and span closure bottom-up (reverse preorder visits
  // children before parents).
  for (int i = static_cast<int>(out.size()) - 1; i >= 0; --i) {
    AstNode &n = out[static_cast<size_t>(i)];
    n.size = 1;
    n.height = 1;
    for (int c : n.children) {
      const AstNode &ch = out[static_cast<size_t>(c)];
      n.size += ch.size;
      n.height = std::max(n.height, ch.height + 1);
      n.span = n.span.merged(ch.span);
    }
  }
  nodes_ = std::move(out);
}

bool NormalizedAst::same_subtree(int id, const NormalizedAst &other, int other_id) const {
  const AstNode &a = node(id);
  const AstNode &b = other.node(other_id);
  if (a.size != b.size)
    return false;
  for (int k = 0; k < a.size; ++k) {
    const AstNode &x = node(id + k);
    const AstNode &y = other.node(other_id + k);
    if (x.kind != y.kind || x.label != y.label || x.children.size() != y.children.size())
      return false;
  }
  return true;
}

bool NormalizedAst::same_shape(const NormalizedAst &other) const {
  if (empty() || other.empty())
    return empty() && other.empty();
  return same_subtree(0, other, 0);
}

std::string NormalizedAst::to_sexpr(int id) const {
  const AstNode &n = node(id);
  std::string out(to_string(n.kind));
  if (!n.label.empty())
    out += "(\"" + n.label + "\")";
  if (!n.children.empty()) {
    out += "[";
    for (size_t i = 0; i < n.children.size(); ++i) {
      if (i)
        out += ", ";
      out += to_sexpr(n.children[i]);
    }
    out += "]";
  }
  return out;
}

} // namespace changeminer
