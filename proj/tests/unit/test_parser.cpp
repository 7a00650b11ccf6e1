#include <doctest.h>

#include "changeminer/source_frontend.hpp"

#include <algorithm>

using namespace changeminer;

namespace {

std::string sexpr(std::string_view src) { return parse_source(src).to_sexpr(); }

bool has_kind(const NormalizedAst &ast, SyntaxKind k) {
  return std::any_of(ast.nodes().begin(), ast.nodes().end(),
                     [k](const AstNode &n) { return n.kind == k; });
}

void check_tree_invariants(const NormalizedAst &ast) {
  REQUIRE_FALSE(ast.empty());
  CHECK(ast.node(0).parent == -1);
  std::vector<int> parent_count(static_cast<size_t>(ast.size()), 0);
  for (int i = 0; i < ast.size(); ++i) {
    const AstNode &n = ast.node(i);
    for (int c : n.children) {
      ++parent_count[static_cast<size_t>(c)];
      CHECK(ast.node(c).parent == i);
      CHECK(n.span.contains(ast.node(c).span));
    }
    if (n.kind == SyntaxKind::Name || n.kind == SyntaxKind::Literal)
      CHECK_FALSE(n.label.empty());
  }
  for (int i = 1; i < ast.size(); ++i)
    CHECK(parent_count[static_cast<size_t>(i)] == 1);
}

} // namespace

TEST_CASE("minimal assignment") {
  CHECK(sexpr("x = 1") == R"(Module[Assign[Name("x"), Literal("1")]])");
}

TEST_CASE("malformed definition reports line 1") {
  try {
    parse_source("def f(:");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError &e) {
    CHECK(e.line() == 1);
  }
}

TEST_CASE("syntax errors carry the offending line") {
  CHECK_THROWS_AS(parse_source("x = (1,\n"), SyntaxError);
  try {
    parse_source("a = 1\nb = 2\nc = = 3\n");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError &e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_source("f() = 3\n"), SyntaxError);
  CHECK_THROWS_AS(parse_source("if x:\npass\n"), SyntaxError);
  CHECK_THROWS_AS(parse_source("print 'hello'\n"), SyntaxError);
}

TEST_CASE("set update loop parses with for over attribute call") {
  const char *src = "data = set()\n"
                    "for elem in collection:\n"
                    "    data.add(elem)\n";
  auto ast = parse_source(src);
  check_tree_invariants(ast);
  CHECK(ast.to_sexpr() ==
        R"(Module[Assign[Name("data"), Call[Name("set")]], For[Name("elem"), Name("collection"), )"
        R"(Body[ExprStmt[Call[Attribute("add")[Name("data")], Name("elem")]]]]])");
}

TEST_CASE("statement shapes") {
  CHECK(sexpr("if a:\n  b\nelif c:\n  d\nelse:\n  e\n") ==
        R"(Module[If[Name("a"), Body[ExprStmt[Name("b")]], OrElse[If[Name("c"), )"
        R"(Body[ExprStmt[Name("d")]], OrElse[ExprStmt[Name("e")]]]]]])");
  CHECK(sexpr("x += 2") == R"(Module[AugAssign("+")[Name("x"), Literal("2")]])");
  CHECK(sexpr("x: int = 3") == R"(Module[AnnAssign[Name("x"), Literal("3")]])");
  CHECK(sexpr("import numpy as np, os.path") ==
        R"(Module[Import[Alias("numpy as np"), Alias("os.path")]])");
  CHECK(sexpr("from ..a import (b, c as d,)") ==
        R"(Module[ImportFrom("..a")[Alias("b"), Alias("c as d")]])");
  CHECK(sexpr("try:\n  f()\nexcept ValueError as e:\n  pass\n") ==
        R"(Module[Try[Body[ExprStmt[Call[Name("f")]]], ExceptHandler[Name("ValueError"), )"
        R"(Name("e"), Body[Pass]]]])");
  CHECK(sexpr("with open(p) as fh, lock:\n  pass\n") ==
        R"(Module[With[WithItem[Call[Name("open"), Name("p")], Name("fh")], )"
        R"(WithItem[Name("lock")], Body[Pass]]])");
  CHECK(sexpr("def f(a, b: int = 1, *args, c, **kw) -> None:\n  return a\n") ==
        R"(Module[FunctionDef("f")[Arguments[Arg("a"), Arg("b")[Literal("1")], Arg("*args"), )"
        R"(Arg("c"), Arg("**kw")], Body[Return[Name("a")]]]])");
  CHECK(sexpr("global a, b") == R"(Module[Global("a,b")])");
  CHECK(sexpr("a, *b = c") ==
        R"(Module[Assign[Tuple[Name("a"), Starred[Name("b")]], Name("c")]])");
}

TEST_CASE("expression shapes") {
  CHECK(sexpr("a < b <= c") == R"(Module[ExprStmt[Compare("<,<=")[Name("a"), Name("b"), Name("c")]]])");
  CHECK(sexpr("x not in y") == R"(Module[ExprStmt[Compare("not in")[Name("x"), Name("y")]]])");
  CHECK(sexpr("a or b and not c") ==
        R"(Module[ExprStmt[BoolOp("or")[Name("a"), BoolOp("and")[Name("b"), UnaryOp("not")[Name("c")]]]]])");
  CHECK(sexpr("1 + 2 * 3") ==
        R"(Module[ExprStmt[BinOp("+")[Literal("1"), BinOp("*")[Literal("2"), Literal("3")]]]])");
  CHECK(sexpr("-x ** 2") == R"(Module[ExprStmt[UnaryOp("-")[BinOp("**")[Name("x"), Literal("2")]]]])");
  CHECK(sexpr("a[1:]") == R"(Module[ExprStmt[Subscript[Name("a"), Slice("x:")[Literal("1")]]]])");
  CHECK(sexpr("a[::2]") == R"(Module[ExprStmt[Subscript[Name("a"), Slice("::x")[Literal("2")]]]])");
  CHECK(sexpr("f(x, k=1, *a, **b)") ==
        R"(Module[ExprStmt[Call[Name("f"), Name("x"), Keyword("k")[Literal("1")], )"
        R"(Starred[Name("a")], DoubleStarred[Name("b")]]]])");
  CHECK(sexpr("[y for y in z if y]") ==
        R"(Module[ExprStmt[ListComp[Name("y"), Comprehension[Name("y"), Name("z"), Name("y")]]]])");
  CHECK(sexpr("{k: v for k, v in d}") ==
        R"(Module[ExprStmt[DictComp[Name("k"), Name("v"), Comprehension[Tuple[Name("k"), )"
        R"(Name("v")], Name("d")]]]])");
  CHECK(sexpr("sum(x for x in y)") ==
        R"(Module[ExprStmt[Call[Name("sum"), GeneratorExp[Name("x"), Comprehension[Name("x"), )"
        R"(Name("y")]]]]])");
  CHECK(sexpr("a if b else c") == R"(Module[ExprStmt[IfExp[Name("a"), Name("b"), Name("c")]]])");
  CHECK(sexpr("lambda x, y=2: x") ==
        R"(Module[ExprStmt[Lambda[Arguments[Arg("x"), Arg("y")[Literal("2")]], Name("x")]]])");
  CHECK(sexpr("'a' \"b\"") == R"(Module[ExprStmt[Literal("'a' "b"")]])");
  CHECK(sexpr("{1: 2, **d}") ==
        R"(Module[ExprStmt[Dict[Literal("1"), Literal("2"), DoubleStarred[Name("d")]]]])");
  CHECK(sexpr("{1, 2}") == R"(Module[ExprStmt[Set[Literal("1"), Literal("2")]]])");
  CHECK(sexpr("()") == R"(Module[ExprStmt[Tuple]])");
  CHECK(sexpr("(n := 10)") == R"(Module[ExprStmt[NamedExpr[Name("n"), Literal("10")]]])");
  CHECK(sexpr("x = f'{a}' rb'q'") == R"(Module[Assign[Name("x"), Literal("f'{a}' rb'q'")]])");
}

TEST_CASE("soft keyword match") {
  CHECK(sexpr("match = 1\nmatch(x)\n") ==
        R"(Module[Assign[Name("match"), Literal("1")], ExprStmt[Call[Name("match"), Name("x")]]])");
  auto ast = parse_source("match cmd:\n  case [a, b] if a:\n    pass\n  case _:\n    pass\n");
  CHECK(has_kind(ast, SyntaxKind::Match));
  CHECK(has_kind(ast, SyntaxKind::MatchCase));
  check_tree_invariants(ast);
}

TEST_CASE("comments and layout do not change the tree") {
  const char *a = "def f(x, y):\n    z = x + y\n    return g(z, [1, 2])\n";
  const char *b = "# header\n\ndef f(x,\n      y):  # params\n\n    z = x+y   # sum\n"
                  "    return g(z,\n             [1,\n              2])\n";
  const char *c = "def f(x, y):\r\n\tz = x + \\\n  y\r\n\treturn g( z , [ 1 , 2 ] )\r\n";
  auto ta = parse_source(a);
  CHECK(ta.same_shape(parse_source(b)));
  CHECK(ta.same_shape(parse_source(c)));
}

TEST_CASE("spans are nested and statements span full extent") {
  const char *src = "def f():\n    x = g(1,\n          2)\n    return x\n";
  auto ast = parse_source(src);
  check_tree_invariants(ast);
  const AstNode *assign = nullptr;
  for (const AstNode &n : ast.nodes())
    if (n.kind == SyntaxKind::Assign)
      assign = &n;
  REQUIRE(assign);
  CHECK(assign->span == Span{2, 4, 3, 12});
}

TEST_CASE("decode_source replaces invalid bytes") {
  CHECK(decode_source("a\xff" "b") == "a\xEF\xBF\xBD" "b");
  CHECK(decode_source("\xEF\xBB\xBFx\r\ny\rz") == "x\ny\nz");
  auto ast = parse_source("s = 'caf\xe9'\n");
  CHECK(ast.node(ast.node(1).children[1]).label == "'caf\xEF\xBF\xBD'");
}

TEST_CASE("parser invariants hold over a varied module") {
  const char *src = R"(import os
from . import sibling

@decorator(arg=1)
class Widget(base.Base, metaclass=Meta):
    """Doc."""
    count: int = 0

    def __init__(self, *, name=None):
        self.name = name or 'w'

    async def fetch(self, url):
        async with session.get(url) as resp:
            return await resp.json()

    @property
    def size(self):
        return len(self.items[1:-1]) if self.items else 0


def outer(a):
    def inner(b):
        nonlocal a
        a += b
    while a > 0:
        try:
            inner(-1)
        except (ValueError, TypeError):
            break
        else:
            continue
    del a
    assert True, "never"
    raise RuntimeError("x") from None
)";
  check_tree_invariants(parse_source(src));
}

TEST_CASE("extract_functions naming and support") {
  const char *src = "def a():\n  pass\n"
                    "def b():\n  yield 1\n"
                    "class C(unittest.TestCase):\n"
                    "  def m(self):\n    def inner():\n      return 1\n    return inner\n"
                    "if flag:\n  def a():\n    return 2\n"
                    "def c():\n  try:\n    pass\n  finally:\n    pass\n";
  auto units = extract_functions(parse_source(src), "pkg.mod");
  std::vector<std::string> names;
  for (const auto &u : units)
    names.push_back(u.qualified_name);
  CHECK(names == std::vector<std::string>{"pkg.mod.a", "pkg.mod.b", "pkg.mod.C.m",
                                          "pkg.mod.C.m.inner", "pkg.mod.a#2", "pkg.mod.c"});
  CHECK(units[0].supported);
  CHECK_FALSE(units[1].supported);
  CHECK(units[2].supported);
  CHECK_FALSE(units[5].supported);
  REQUIRE(units[2].enclosing_class.has_value());
  CHECK(units[2].enclosing_class->qualified_name == "pkg.mod.C");
  CHECK(units[2].enclosing_class->bases == std::vector<std::string>{"unittest.TestCase"});
  CHECK(units[2].enclosing_class->methods.count("m") == 1);
  CHECK(units[2].params == std::vector<std::string>{"self"});
  CHECK_FALSE(units[3].enclosing_class.has_value());
}

TEST_CASE("extract_functions yields disjoint bodies") {
  const char *src = "def f(x):\n  def g(y):\n    return y\n  class K:\n    def h(self):\n"
                    "      return 2\n  return g(x)\n";
  auto module = parse_source(src);
  auto units = extract_functions(module, "m");
  REQUIRE(units.size() == 3);
  size_t total = 0;
  for (const auto &u : units)
    total += static_cast<size_t>(u.body.size());
  // Module and ClassDef nodes (with its Body) are not part of any unit.
  int class_nodes = 0;
  for (const AstNode &n : module.nodes())
    if (n.kind == SyntaxKind::ClassDef)
      class_nodes += 2;
  CHECK(total + 1 + static_cast<size_t>(class_nodes) == static_cast<size_t>(module.size()));
  CHECK(extract_functions(parse_source(""), "m").empty());
}

TEST_CASE("import table") {
  auto t = build_import_table(parse_source("import numpy as np"));
  CHECK(t.aliases == std::map<std::string, std::string>{{"np", "numpy"}});
  t = build_import_table(parse_source("from copy import deepcopy"));
  CHECK(t.aliases == std::map<std::string, std::string>{{"deepcopy", "copy.deepcopy"}});
  CHECK(build_import_table(parse_source("")) == ImportTable{});
  t = build_import_table(parse_source("import os.path\nfrom x import *\nfrom .util import h as H\n"),
                         "pkg.sub.mod");
  CHECK(t.aliases.at("os") == "os");
  CHECK(t.aliases.at("H") == "pkg.sub.util.h");
  CHECK(t.star_imports == std::vector<std::string>{"x"});
  auto module = parse_source("def f():\n  pass\nclass K:\n  pass\n");
  CHECK(build_import_table(module) == build_import_table(module));
  add_module_definitions(t, module, "pkg.sub.mod");
  CHECK(t.module_defs.at("K") == "pkg.sub.mod.K");
}

TEST_CASE("module paths") {
  CHECK(module_path_for_file("pkg/sub/mod.py") == "pkg.sub.mod");
  CHECK(module_path_for_file("pkg/__init__.py") == "pkg");
  CHECK(module_path_for_file("setup.py") == "setup");
}
