#include "changeminer/source_frontend.hpp"

#include <functional>

namespace changeminer {
namespace {

bool is_definition(const AstNode &n) {
  return n.kind == SyntaxKind::FunctionDef || n.kind == SyntaxKind::ClassDef;
}

std::string join_dotted(const std::string &prefix, const std::string &name) {
  return prefix.empty() ? name : prefix + "." + name;
}

// Dotted text of a Name/Attribute chain, empty for anything else.
std::string dotted_expression(const NormalizedAst &ast, int id) {
  const AstNode &n = ast.node(id);
  if (n.kind == SyntaxKind::Name)
    return n.label;
  if (n.kind == SyntaxKind::Attribute && n.children.size() == 1) {
    std::string base = dotted_expression(ast, n.children[0]);
    return base.empty() ? "" : base + "." + n.label;
  }
  return "";
}

const char *unsupported_reason(const NormalizedAst &body) {
  for (const AstNode &n : body.nodes()) {
    switch (n.kind) {
    case SyntaxKind::Yield:
    case SyntaxKind::YieldFrom:
      return "generator";
    case SyntaxKind::FinalBody:
      return "finally clause";
    case SyntaxKind::Match:
      return "match statement";
    default:
      break;
    }
  }
  return nullptr;
}

class FunctionCollector {
public:
  explicit FunctionCollector(const NormalizedAst &ast) : ast_(ast) {}

  std::vector<FunctionUnit> run(const std::string &module_path) {
    visit_children(ast_.root(), module_path, nullptr);
    return std::move(units_);
  }

private:
  std::string disambiguate(const std::string &name) {
    int n = ++seen_[name];
    return n == 1 ? name : name + "#" + std::to_string(n);
  }

  void visit_children(int id, const std::string &prefix, const ClassContext *cls) {
    for (int c : ast_.node(id).children)
      visit(c, prefix, cls);
  }

  void visit(int id, const std::string &prefix, const ClassContext *cls) {
    const AstNode &n = ast_.node(id);
    if (n.kind == SyntaxKind::FunctionDef) {
      add_function(id, prefix, cls);
      return;
    }
    if (n.kind == SyntaxKind::ClassDef) {
      add_class(id, prefix);
      return;
    }
    // Statements nested in if/try/with blocks of a class body still belong
    // to the class.
    visit_children(id, prefix, cls);
  }

  void add_function(int id, const std::string &prefix, const ClassContext *cls) {
    const AstNode &n = ast_.node(id);
    FunctionUnit unit;
    unit.name = n.label;
    unit.qualified_name = disambiguate(join_dotted(prefix, n.label));
    unit.span = n.span;
    for (int c : n.children) {
      const AstNode &child = ast_.node(c);
      if (child.kind != SyntaxKind::Arguments)
        continue;
      for (int a : child.children) {
        std::string p = ast_.node(a).label;
        p.erase(0, p.find_first_not_of('*'));
        unit.params.push_back(p);
      }
    }
    unit.body = ast_.subtree(id, is_definition);
    if (const char *why = unsupported_reason(unit.body)) {
      unit.supported = false;
      unit.unsupported_reason = why;
    }
    if (cls)
      unit.enclosing_class = *cls;
    std::string qualified = unit.qualified_name;
    units_.push_back(std::move(unit));
    visit_children(id, qualified, nullptr);
  }

  void add_class(int id, const std::string &prefix) {
    const AstNode &n = ast_.node(id);
    ClassContext ctx;
    ctx.qualified_name = disambiguate(join_dotted(prefix, n.label));
    int body = -1;
    for (int c : n.children) {
      const AstNode &child = ast_.node(c);
      if (child.kind == SyntaxKind::Bases) {
        for (int b : child.children) {
          std::string dotted = dotted_expression(ast_, b);
          if (!dotted.empty())
            ctx.bases.push_back(dotted);
        }
      } else if (child.kind == SyntaxKind::Body) {
        body = c;
      }
    }
    if (body >= 0) {
      std::function<void(int)> collect = [&](int s) {
        for (int c : ast_.node(s).children) {
          const AstNode &stmt = ast_.node(c);
          if (stmt.kind == SyntaxKind::FunctionDef)
            ctx.methods.insert(stmt.label);
          else if (stmt.kind != SyntaxKind::ClassDef)
            collect(c);
        }
      };
      collect(body);
    }
    for (int c : n.children)
      visit(c, ctx.qualified_name, &ctx);
  }

  const NormalizedAst &ast_;
  std::map<std::string, int> seen_;
  std::vector<FunctionUnit> units_;
};

std::string resolve_relative(const std::string &module, const std::string &module_path) {
  size_t dots = module.find_first_not_of('.');
  if (dots == std::string::npos)
    dots = module.size();
  std::string rest = module.substr(dots);
  if (dots == 0)
    return rest;
  std::vector<std::string> parts;
  size_t start = 0;
  while (!module_path.empty() && start <= module_path.size()) {
    size_t end = module_path.find('.', start);
    if (end == std::string::npos)
      end = module_path.size();
    parts.push_back(module_path.substr(start, end - start));
    start = end + 1;
  }
  for (size_t i = 0; i < dots && !parts.empty(); ++i)
    parts.pop_back();
  std::string base;
  for (const auto &p : parts)
    base = join_dotted(base, p);
  return join_dotted(base, rest);
}

} // namespace

std::vector<FunctionUnit> extract_functions(const NormalizedAst &module,
                                            const std::string &module_path) {
  if (module.empty())
    return {};
  return FunctionCollector(module).run(module_path);
}

ImportTable build_import_table(const NormalizedAst &module, const std::string &module_path) {
  ImportTable table;
  for (const AstNode &n : module.nodes()) {
    if (n.kind == SyntaxKind::Import) {
      for (int a : n.children) {
        const std::string &text = module.node(a).label;
        auto as = text.find(" as ");
        if (as != std::string::npos) {
          table.aliases[text.substr(as + 4)] = text.substr(0, as);
        } else {
          std::string root = text.substr(0, text.find('.'));
          table.aliases[root] = root;
        }
      }
    } else if (n.kind == SyntaxKind::ImportFrom) {
      std::string source = resolve_relative(n.label, module_path);
      for (int a : n.children) {
        const std::string &text = module.node(a).label;
        if (text == "*") {
          if (!source.empty())
            table.star_imports.push_back(source);
          continue;
        }
        auto as = text.find(" as ");
        std::string name = as == std::string::npos ? text : text.substr(0, as);
        std::string local = as == std::string::npos ? text : text.substr(as + 4);
        table.aliases[local] = join_dotted(source, name);
      }
    }
  }
  return table;
}

void add_module_definitions(ImportTable &table, const NormalizedAst &module,
                            const std::string &module_path) {
  if (module.empty())
    return;
  for (int c : module.node(module.root()).children) {
    const AstNode &n = module.node(c);
    if (is_definition(n))
      table.module_defs.emplace(n.label, join_dotted(module_path, n.label));
  }
}

std::string module_path_for_file(std::string_view file_path) {
  std::string p(file_path);
  if (p.size() >= 3 && p.compare(p.size() - 3, 3, ".py") == 0)
    p.resize(p.size() - 3);
  for (char &c : p)
    if (c == '/' || c == '\\')
      c = '.';
  const std::string init = "__init__";
  if (p == init)
    return "";
  if (p.size() > init.size() && p.compare(p.size() - init.size() - 1, init.size() + 1, "." + init) == 0)
    p.resize(p.size() - init.size() - 1);
  return p;
}

} // namespace changeminer
