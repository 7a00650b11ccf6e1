#include "changeminer/fgpdg.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <numeric>
#include <optional>
#include <set>

namespace changeminer {

std::string_view to_string(NodeKind k) {
  static constexpr std::array<std::string_view, 3> names = {"Data", "Operation", "Control"};
  return names.at(static_cast<size_t>(k));
}
std::string_view to_string(EdgeKind k) { return k == EdgeKind::Control ? "Control" : "Data"; }
std::string_view to_string(Version v) {
  static constexpr std::array<std::string_view, 3> names = {"None", "Before", "After"};
  return names.at(static_cast<size_t>(v));
}

NodeKind node_kind_from_string(std::string_view s) {
  if (s == "Data")
    return NodeKind::Data;
  if (s == "Operation")
    return NodeKind::Operation;
  if (s == "Control")
    return NodeKind::Control;
  throw std::invalid_argument("unknown node kind: " + std::string(s));
}
EdgeKind edge_kind_from_string(std::string_view s) {
  if (s == "Data")
    return EdgeKind::Data;
  if (s == "Control")
    return EdgeKind::Control;
  throw std::invalid_argument("unknown edge kind: " + std::string(s));
}
Version version_from_string(std::string_view s) {
  if (s == "Before")
    return Version::Before;
  if (s == "After")
    return Version::After;
  if (s == "None")
    return Version::None;
  throw std::invalid_argument("unknown version: " + std::string(s));
}

namespace {

struct Resolution {
  std::string label;
  bool module_qualified = false; // resolved through an import or module definition
};

// Names of a Name/Attribute chain from the root outwards; nullopt otherwise.
std::optional<std::vector<std::string>> name_chain(const NormalizedAst &ast, int id) {
  std::vector<std::string> rev;
  while (true) {
    const AstNode &n = ast.node(id);
    if (n.kind == SyntaxKind::Name) {
      rev.push_back(n.label);
      break;
    }
    if (n.kind != SyntaxKind::Attribute || n.children.size() != 1)
      return std::nullopt;
    rev.push_back(n.label);
    id = n.children[0];
  }
  return std::vector<std::string>(rev.rbegin(), rev.rend());
}

std::string join_from(const std::string &head, const std::vector<std::string> &chain, size_t from) {
  std::string out = head;
  for (size_t i = from; i < chain.size(); ++i)
    out += "." + chain[i];
  return out;
}

// Resolves a dotted chain through imports and module definitions.
std::optional<std::string> resolve_chain(const std::vector<std::string> &chain,
                                         const ImportTable &imports) {
  if (auto it = imports.aliases.find(chain[0]); it != imports.aliases.end())
    return join_from(it->second, chain, 1);
  if (auto it = imports.module_defs.find(chain[0]); it != imports.module_defs.end())
    return join_from(it->second, chain, 1);
  return std::nullopt;
}

std::optional<std::string> resolve_dotted(const std::string &dotted, const ImportTable &imports) {
  std::vector<std::string> parts;
  size_t start = 0;
  while (start <= dotted.size()) {
    size_t end = dotted.find('.', start);
    if (end == std::string::npos)
      end = dotted.size();
    parts.push_back(dotted.substr(start, end - start));
    start = end + 1;
  }
  return resolve_chain(parts, imports);
}

Resolution resolve_callee_expr(const NormalizedAst &ast, int callee, const ImportTable &imports,
                               const CallScope *scope) {
  const AstNode &c = ast.node(callee);
  auto chain = name_chain(ast, callee);
  if (!chain) {
    if (c.kind == SyntaxKind::Attribute)
      return {"?." + c.label, false};
    return {"?.__call__", false};
  }
  if (scope && scope->cls && !scope->self_name.empty() && chain->size() == 2 &&
      (*chain)[0] == scope->self_name) {
    const std::string &m = (*chain)[1];
    if (scope->cls->methods.count(m))
      return {scope->cls->qualified_name + "." + m, false};
    for (const auto &base : scope->cls->bases)
      if (auto resolved = resolve_dotted(base, imports))
        return {*resolved + "." + m, false};
    return {"?." + m, false};
  }
  if (auto resolved = resolve_chain(*chain, imports))
    return {*resolved, true};
  if (chain->size() == 1)
    return {(*chain)[0], false};
  return {"?." + chain->back(), false};
}

// Collects Name nodes bound by a target expression.
void target_names(const NormalizedAst &ast, int id, std::set<std::string> &out) {
  const AstNode &n = ast.node(id);
  switch (n.kind) {
  case SyntaxKind::Name:
    out.insert(n.label);
    break;
  case SyntaxKind::Tuple:
  case SyntaxKind::List:
  case SyntaxKind::Starred:
    for (int c : n.children)
      target_names(ast, c, out);
    break;
  default:
    break;
  }
}

class Builder {
public:
  Builder(const FunctionUnit &unit, const ImportTable &imports)
      : unit_(unit), ast_(unit.body), imports_(imports) {
    if (unit.enclosing_class && !unit.params.empty()) {
      scope_.self_name = unit.params.front();
      scope_.cls = &*unit.enclosing_class;
    }
  }

  Fgpdg run() {
    collect_locals();
    const AstNode &root = ast_.node(0);
    for (int c : root.children) {
      const AstNode &child = ast_.node(c);
      if (child.kind == SyntaxKind::Arguments)
        for (int a : child.children)
          add_param(a);
      else if (child.kind == SyntaxKind::Body)
        block(c);
    }
    return finish();
  }

private:
  using Env = std::map<std::string, std::vector<int>>;

  struct Pending {
    FgNode node;
    int seq = 0;
  };
  struct Context {
    int node;
    const char *label;
  };

  // ---- graph helpers -------------------------------------------------------

  int add(NodeKind kind, std::string subkind, std::string label, int ast_id,
          std::string concrete = "") {
    Pending p;
    p.node.kind = kind;
    p.node.subkind = std::move(subkind);
    p.node.label = std::move(label);
    p.node.concrete_name = std::move(concrete);
    p.node.span = ast_.node(ast_id).span;
    p.node.ast_node = ast_id;
    p.seq = static_cast<int>(nodes_.size());
    nodes_.push_back(std::move(p));
    int id = static_cast<int>(nodes_.size()) - 1;
    if (kind != NodeKind::Data && !ctx_.empty())
      edge(ctx_.back().node, id, EdgeKind::Control, ctx_.back().label);
    return id;
  }

  void edge(int src, int dst, EdgeKind kind, const char *label) {
    if (src < 0 || dst < 0)
      return;
    edges_.push_back(FgEdge{src, dst, kind, label});
  }
  void data(int src, int dst, const char *label) { edge(src, dst, EdgeKind::Data, label); }

  static void merge_into(Env &dst, const Env &src) {
    for (const auto &[name, defs] : src) {
      auto &v = dst[name];
      v.insert(v.end(), defs.begin(), defs.end());
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    }
  }

  [[noreturn]] void unsupported(int id) const {
    const AstNode &n = ast_.node(id);
    throw UnsupportedConstruct(n.span, std::string(to_string(n.kind)));
  }

  void collect_locals() {
    for (const std::string &p : unit_.params)
      locals_.insert(p);
    for (int i = 0; i < ast_.size(); ++i) {
      const AstNode &n = ast_.node(i);
      switch (n.kind) {
      case SyntaxKind::Assign:
        for (size_t k = 0; k + 1 < n.children.size(); ++k)
          target_names(ast_, n.children[k], locals_);
        break;
      case SyntaxKind::AugAssign:
      case SyntaxKind::AnnAssign:
      case SyntaxKind::For:
      case SyntaxKind::Comprehension:
      case SyntaxKind::NamedExpr:
        target_names(ast_, n.children[0], locals_);
        break;
      case SyntaxKind::WithItem:
        if (n.children.size() == 2)
          target_names(ast_, n.children[1], locals_);
        break;
      case SyntaxKind::ExceptHandler:
        if (n.children.size() == 3)
          target_names(ast_, n.children[1], locals_);
        break;
      default:
        break;
      }
    }
  }

  void add_param(int arg) {
    std::string name = ast_.node(arg).label;
    name.erase(0, name.find_first_not_of('*'));
    int v = add(NodeKind::Data, "var", "var", arg, name);
    env_[name] = {v};
  }

  // ---- statements ----------------------------------------------------------

  void block(int id) {
    for (int s : ast_.node(id).children)
      statement(s);
  }

  void controlled_block(int id, int ctrl, const char *label) {
    ctx_.push_back({ctrl, label});
    block(id);
    ctx_.pop_back();
  }

  void statement(int id) {
    const AstNode &n = ast_.node(id);
    switch (n.kind) {
    case SyntaxKind::ExprStmt:
    case SyntaxKind::Return:
    case SyntaxKind::Raise:
    case SyntaxKind::Assert:
    case SyntaxKind::Delete:
      for (int c : n.children)
        expr(c);
      break;
    case SyntaxKind::Assign: {
      int value = expr(n.children.back());
      for (size_t k = 0; k + 1 < n.children.size(); ++k)
        assign(n.children[k], value);
      break;
    }
    case SyntaxKind::AnnAssign:
      if (n.children.size() == 2)
        assign(n.children[0], expr(n.children[1]));
      break;
    case SyntaxKind::AugAssign: {
      int target = n.children[0];
      int use = expr(target);
      int op = add(NodeKind::Operation, "binop", n.label, id);
      data(use, op, "para");
      data(expr(n.children[1]), op, "para");
      assign(target, op);
      break;
    }
    case SyntaxKind::If:
    case SyntaxKind::While:
      branch(id, n.kind == SyntaxKind::If ? "if" : "while");
      break;
    case SyntaxKind::For:
      for_statement(id);
      break;
    case SyntaxKind::Try:
      try_statement(id);
      break;
    case SyntaxKind::With:
      with_statement(id);
      break;
    case SyntaxKind::Match:
    case SyntaxKind::FinalBody:
      unsupported(id);
    case SyntaxKind::FunctionDef:
    case SyntaxKind::ClassDef:
    case SyntaxKind::Import:
    case SyntaxKind::ImportFrom:
    case SyntaxKind::Global:
    case SyntaxKind::Nonlocal:
    case SyntaxKind::Pass:
    case SyntaxKind::Break:
    case SyntaxKind::Continue:
      break;
    default:
      unsupported(id);
    }
  }

  void branch(int id, const char *label) {
    const AstNode &n = ast_.node(id);
    int test = expr(n.children[0]);
    int ctrl = add(NodeKind::Control, label, label, id);
    data(test, ctrl, "cond");
    bool loop = n.kind == SyntaxKind::While;
    Env before = env_;
    controlled_block(n.children[1], ctrl, loop ? "body" : "then");
    Env after_body = env_;
    if (n.children.size() > 2) {
      env_ = loop ? merged(before, after_body) : before;
      controlled_block(n.children[2], ctrl, "else");
      merge_into(env_, loop ? Env{} : after_body);
    } else {
      env_ = merged(before, after_body);
    }
  }

  static Env merged(Env a, const Env &b) {
    merge_into(a, b);
    return a;
  }

  void for_statement(int id) {
    const AstNode &n = ast_.node(id);
    int iter = expr(n.children[1]);
    int ctrl = add(NodeKind::Control, "for", "for", id);
    data(iter, ctrl, "cond");
    Env before = env_;
    for (int t : assign(n.children[0], -1))
      data(t, ctrl, "cond");
    controlled_block(n.children[2], ctrl, "body");
    env_ = merged(before, env_);
    if (n.children.size() > 3)
      controlled_block(n.children[3], ctrl, "else");
  }

  std::string handler_label(int handler) const {
    const AstNode &h = ast_.node(handler);
    if (h.children.size() < 2)
      return "except";
    const AstNode &type = ast_.node(h.children[0]);
    auto dotted = [&](int e) {
      auto chain = name_chain(ast_, e);
      return chain ? join_from((*chain)[0], *chain, 1) : std::string("?");
    };
    if (type.kind == SyntaxKind::Tuple) {
      std::string out;
      for (int c : type.children)
        out += (out.empty() ? "" : ",") + dotted(c);
      return "except " + out;
    }
    return "except " + dotted(h.children[0]);
  }

  void try_statement(int id) {
    const AstNode &n = ast_.node(id);
    int ctrl = add(NodeKind::Control, "try", "try", id);
    Env before = env_;
    int orelse = -1;
    std::vector<int> handlers;
    for (int c : n.children) {
      const AstNode &child = ast_.node(c);
      if (child.kind == SyntaxKind::Body)
        controlled_block(c, ctrl, "body");
      else if (child.kind == SyntaxKind::ExceptHandler)
        handlers.push_back(c);
      else if (child.kind == SyntaxKind::OrElse)
        orelse = c;
      else if (child.kind == SyntaxKind::FinalBody)
        unsupported(c);
    }
    Env after_body = env_;
    Env handler_entry = merged(before, after_body);
    Env out;
    if (orelse >= 0)
      controlled_block(orelse, ctrl, "else");
    out = env_;
    for (int h : handlers) {
      const AstNode &hn = ast_.node(h);
      env_ = handler_entry;
      ctx_.push_back({ctrl, "body"});
      int hc = add(NodeKind::Control, "try", handler_label(h), h);
      ctx_.pop_back();
      if (hn.children.size() == 3) {
        int name = hn.children[1];
        int v = add(NodeKind::Data, "var", "var", name, ast_.node(name).label);
        data(hc, v, "def");
        env_[ast_.node(name).label] = {v};
      }
      controlled_block(hn.children.back(), hc, "body");
      merge_into(out, env_);
    }
    env_ = std::move(out);
  }

  void with_statement(int id) {
    const AstNode &n = ast_.node(id);
    int ctrl = add(NodeKind::Control, "with", "with", id);
    for (int c : n.children) {
      const AstNode &child = ast_.node(c);
      if (child.kind == SyntaxKind::WithItem) {
        int value = expr(child.children[0]);
        data(value, ctrl, "cond");
        if (child.children.size() == 2)
          assign(child.children[1], value);
      } else if (child.kind == SyntaxKind::Body) {
        controlled_block(c, ctrl, "body");
      }
    }
  }

  // Binds `value` to a target expression; returns the defined nodes.
  std::vector<int> assign(int target, int value) {
    const AstNode &t = ast_.node(target);
    std::vector<int> out;
    switch (t.kind) {
    case SyntaxKind::Name: {
      int v = add(NodeKind::Data, "var", "var", target, t.label);
      data(value, v, "def");
      env_[t.label] = {v};
      out.push_back(v);
      break;
    }
    case SyntaxKind::Attribute: {
      int op = add(NodeKind::Operation, "attribute", t.label, target);
      data(expr(t.children[0]), op, "qual");
      data(value, op, "def");
      out.push_back(op);
      break;
    }
    case SyntaxKind::Subscript: {
      int op = subscript(target);
      data(value, op, "def");
      out.push_back(op);
      break;
    }
    case SyntaxKind::Tuple:
    case SyntaxKind::List:
    case SyntaxKind::Starred:
      for (int c : t.children) {
        auto sub = assign(c, value);
        out.insert(out.end(), sub.begin(), sub.end());
      }
      break;
    default:
      unsupported(target);
    }
    return out;
  }

  // ---- expressions ---------------------------------------------------------

  int expr(int id) {
    const AstNode &n = ast_.node(id);
    switch (n.kind) {
    case SyntaxKind::Name:
      return name_use(id);
    case SyntaxKind::Literal:
      return add(NodeKind::Data, "literal", n.label, id);
    case SyntaxKind::Attribute: {
      auto chain = name_chain(ast_, id);
      if (chain && !is_local((*chain)[0]))
        if (auto resolved = resolve_chain(*chain, imports_))
          return add(NodeKind::Data, "constant", *resolved, id);
      int op = add(NodeKind::Operation, "attribute", n.label, id);
      data(expr(n.children[0]), op, "qual");
      return op;
    }
    case SyntaxKind::Call:
      return call(id);
    case SyntaxKind::BinOp:
    case SyntaxKind::BoolOp:
    case SyntaxKind::Compare:
    case SyntaxKind::UnaryOp: {
      const char *sub = n.kind == SyntaxKind::Compare   ? "compare"
                        : n.kind == SyntaxKind::UnaryOp ? "unaryop"
                                                        : "binop";
      int op = add(NodeKind::Operation, sub, n.label, id);
      for (int c : n.children)
        data(expr(c), op, "para");
      return op;
    }
    case SyntaxKind::Subscript:
      return subscript(id);
    case SyntaxKind::List:
    case SyntaxKind::Tuple:
    case SyntaxKind::Set:
    case SyntaxKind::Dict: {
      const char *label = n.kind == SyntaxKind::List    ? "list"
                          : n.kind == SyntaxKind::Tuple ? "tuple"
                          : n.kind == SyntaxKind::Set   ? "set"
                                                        : "dict";
      int op = add(NodeKind::Operation, "call", label, id);
      for (int c : n.children)
        data(expr(c), op, "para");
      return op;
    }
    case SyntaxKind::ListComp:
    case SyntaxKind::SetComp:
    case SyntaxKind::DictComp:
    case SyntaxKind::GeneratorExp:
      return comprehension(id);
    case SyntaxKind::IfExp: {
      int test = expr(n.children[1]);
      int ctrl = add(NodeKind::Control, "if", "if", id);
      data(test, ctrl, "cond");
      ctx_.push_back({ctrl, "then"});
      int body = expr(n.children[0]);
      ctx_.back().label = "else";
      int orelse = expr(n.children[2]);
      ctx_.pop_back();
      data(body, ctrl, "para");
      data(orelse, ctrl, "para");
      return ctrl;
    }
    case SyntaxKind::NamedExpr: {
      int value = expr(n.children[1]);
      auto defs = assign(n.children[0], value);
      return defs.empty() ? value : defs.front();
    }
    case SyntaxKind::Lambda:
      return add(NodeKind::Data, "constant", "lambda", id);
    case SyntaxKind::Await:
    case SyntaxKind::Starred:
    case SyntaxKind::DoubleStarred:
    case SyntaxKind::Keyword:
      return expr(n.children[0]);
    default:
      unsupported(id);
    }
  }

  bool is_local(const std::string &name) const {
    return locals_.count(name) > 0 || env_.count(name) > 0;
  }

  int name_use(int id) {
    const std::string &name = ast_.node(id).label;
    if (!is_local(name)) {
      if (auto resolved = resolve_chain({name}, imports_))
        return add(NodeKind::Data, "constant", *resolved, id);
    }
    int v = add(NodeKind::Data, "var", "var", id, name);
    if (auto it = env_.find(name); it != env_.end())
      for (int d : it->second)
        data(d, v, "ref");
    return v;
  }

  int call(int id) {
    const AstNode &n = ast_.node(id);
    int callee = n.children[0];
    Resolution r = resolve_callee_expr(ast_, callee, imports_, scope_.cls ? &scope_ : nullptr);
    int op = add(NodeKind::Operation, "call", r.label, id);
    if (!r.module_qualified) {
      const AstNode &c = ast_.node(callee);
      if (c.kind == SyntaxKind::Attribute)
        data(expr(c.children[0]), op, "recv");
      else if (c.kind != SyntaxKind::Name)
        data(expr(callee), op, "recv");
    }
    for (size_t k = 1; k < n.children.size(); ++k)
      data(expr(n.children[k]), op, "para");
    return op;
  }

  int subscript(int id) {
    const AstNode &n = ast_.node(id);
    const AstNode &index = ast_.node(n.children[1]);
    bool slice = index.kind == SyntaxKind::Slice;
    int op = add(NodeKind::Operation, "subscript", slice ? "[" + index.label + "]" : "[]", id);
    data(expr(n.children[0]), op, "para");
    if (slice) {
      for (int c : index.children)
        data(expr(c), op, "para");
    } else {
      data(expr(n.children[1]), op, "para");
    }
    return op;
  }

  int comprehension(int id) {
    const AstNode &n = ast_.node(id);
    Env saved = env_;
    size_t depth = ctx_.size();
    std::vector<int> elements;
    for (int c : n.children)
      if (ast_.node(c).kind != SyntaxKind::Comprehension)
        elements.push_back(c);
    for (int c : n.children) {
      const AstNode &comp = ast_.node(c);
      if (comp.kind != SyntaxKind::Comprehension)
        continue;
      int iter = expr(comp.children[1]);
      int ctrl = add(NodeKind::Control, "for", "for", c);
      data(iter, ctrl, "cond");
      for (int t : assign(comp.children[0], -1))
        data(t, ctrl, "cond");
      ctx_.push_back({ctrl, "body"});
      for (size_t k = 2; k < comp.children.size(); ++k)
        data(expr(comp.children[k]), ctrl, "cond");
    }
    std::vector<int> values;
    for (int e : elements)
      values.push_back(expr(e));
    ctx_.resize(depth);
    const char *label = n.kind == SyntaxKind::ListComp  ? "list"
                        : n.kind == SyntaxKind::SetComp ? "set"
                        : n.kind == SyntaxKind::DictComp ? "dict"
                                                          : "generator";
    int op = add(NodeKind::Operation, "call", label, id);
    for (int v : values)
      data(v, op, "para");
    env_ = std::move(saved);
    return op;
  }

  // ---- output --------------------------------------------------------------

  Fgpdg finish() {
    std::vector<int> degree(nodes_.size(), 0);
    for (const FgEdge &e : edges_) {
      ++degree[static_cast<size_t>(e.src)];
      ++degree[static_cast<size_t>(e.dst)];
    }
    std::vector<int> order;
    for (size_t i = 0; i < nodes_.size(); ++i)
      if (nodes_[i].node.kind != NodeKind::Data || degree[i] > 0)
        order.push_back(static_cast<int>(i));
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const Pending &x = nodes_[static_cast<size_t>(a)];
      const Pending &y = nodes_[static_cast<size_t>(b)];
      return std::tie(x.node.ast_node, x.seq) < std::tie(y.node.ast_node, y.seq);
    });
    std::vector<int> remap(nodes_.size(), -1);
    Fgpdg g;
    g.function = unit_.qualified_name;
    for (int old : order) {
      remap[static_cast<size_t>(old)] = static_cast<int>(g.nodes.size());
      FgNode node = nodes_[static_cast<size_t>(old)].node;
      node.id = static_cast<int>(g.nodes.size());
      g.nodes.push_back(std::move(node));
    }
    for (FgEdge e : edges_) {
      e.src = remap[static_cast<size_t>(e.src)];
      e.dst = remap[static_cast<size_t>(e.dst)];
      g.edges.push_back(std::move(e));
    }
    std::sort(g.edges.begin(), g.edges.end(), [](const FgEdge &a, const FgEdge &b) {
      return std::tie(a.src, a.dst, a.kind, a.label) < std::tie(b.src, b.dst, b.kind, b.label);
    });
    g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
    return g;
  }

  const FunctionUnit &unit_;
  const NormalizedAst &ast_;
  const ImportTable &imports_;
  CallScope scope_;
  std::vector<Pending> nodes_;
  std::vector<FgEdge> edges_;
  std::vector<Context> ctx_;
  Env env_;
  std::set<std::string> locals_;
};

} // namespace

std::string resolve_callee(const NormalizedAst &ast, int call_id, const ImportTable &imports,
                           const CallScope *scope) {
  const AstNode &n = ast.node(call_id);
  if (n.kind != SyntaxKind::Call || n.children.empty())
    throw std::invalid_argument("resolve_callee expects a Call node");
  return resolve_callee_expr(ast, n.children[0], imports, scope).label;
}

std::string resolve_callee(const NormalizedAst &call_subtree, const ImportTable &imports) {
  return resolve_callee(call_subtree, call_subtree.root(), imports);
}

Fgpdg build_fgpdg(const FunctionUnit &unit, const ImportTable &imports) {
  if (!unit.supported)
    throw UnsupportedConstruct(unit.span, unit.unsupported_reason);
  if (unit.body.empty())
    return Fgpdg{unit.qualified_name, {}, {}};
  return Builder(unit, imports).run();
}

} // namespace changeminer
