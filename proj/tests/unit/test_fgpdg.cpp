#include <doctest.h>

#include "changeminer/fgpdg.hpp"

#include <set>

using namespace changeminer;

namespace {

FunctionUnit only_unit(const std::string &src, const std::string &module = "m") {
  auto units = extract_functions(parse_source(src), module);
  REQUIRE(units.size() >= 1);
  return units.front();
}

Fgpdg build(const std::string &src, const std::string &module = "m") {
  auto ast = parse_source(src);
  auto imports = build_import_table(ast, module);
  add_module_definitions(imports, ast, module);
  auto units = extract_functions(ast, module);
  REQUIRE(units.size() >= 1);
  return build_fgpdg(units.back(), imports);
}

std::vector<int> find(const Fgpdg &g, NodeKind kind, const std::string &label,
                      const std::string &concrete = "") {
  std::vector<int> out;
  for (const auto &n : g.nodes)
    if (n.kind == kind && n.label == label && (concrete.empty() || n.concrete_name == concrete))
      out.push_back(n.id);
  return out;
}

bool has_edge(const Fgpdg &g, int src, int dst, EdgeKind kind, const std::string &label) {
  for (const auto &e : g.edges)
    if (e.src == src && e.dst == dst && e.kind == kind && e.label == label)
      return true;
  return false;
}

int count_label(const Fgpdg &g, const std::string &label) {
  int n = 0;
  for (const auto &e : g.edges)
    n += e.label == label;
  return n;
}

void check_graph_invariants(const Fgpdg &g) {
  static const std::set<std::string> data_labels = {"def", "ref", "para", "recv", "cond", "qual"};
  static const std::set<std::string> control_labels = {"then", "else", "body"};
  static const std::map<NodeKind, std::set<std::string>> subkinds = {
      {NodeKind::Data, {"var", "literal", "constant"}},
      {NodeKind::Operation, {"call", "binop", "unaryop", "compare", "subscript", "attribute"}},
      {NodeKind::Control, {"if", "for", "while", "try", "with"}}};
  std::vector<int> degree(g.nodes.size(), 0);
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    CHECK(g.nodes[i].id == static_cast<int>(i));
    CHECK(subkinds.at(g.nodes[i].kind).count(g.nodes[i].subkind) == 1);
    if (g.nodes[i].subkind == "var")
      CHECK(g.nodes[i].label == "var");
  }
  for (const auto &e : g.edges) {
    REQUIRE(e.src >= 0);
    REQUIRE(e.dst >= 0);
    REQUIRE(e.src < static_cast<int>(g.nodes.size()));
    REQUIRE(e.dst < static_cast<int>(g.nodes.size()));
    ++degree[static_cast<size_t>(e.src)];
    ++degree[static_cast<size_t>(e.dst)];
    if (e.kind == EdgeKind::Data) {
      CHECK(data_labels.count(e.label) == 1);
    } else {
      CHECK(control_labels.count(e.label) == 1);
      CHECK(g.nodes[static_cast<size_t>(e.src)].kind == NodeKind::Control);
      CHECK(g.nodes[static_cast<size_t>(e.dst)].kind != NodeKind::Data);
    }
  }
  for (size_t i = 0; i < g.nodes.size(); ++i)
    if (g.nodes[i].kind == NodeKind::Data)
      CHECK(degree[i] > 0);
}

const char *kMergeBefore = "def merge(collection):\n"
                            "    data = set()\n"
                            "    for elem in collection:\n"
                            "        data.add(elem)\n"
                            "    return data\n";

} // namespace

TEST_CASE("set update loop builds for-controlled add call") {
  Fgpdg g = build(kMergeBefore);
  check_graph_invariants(g);
  auto fors = find(g, NodeKind::Control, "for");
  auto adds = find(g, NodeKind::Operation, "?.add");
  REQUIRE(fors.size() == 1);
  REQUIRE(adds.size() == 1);
  CHECK(has_edge(g, fors[0], adds[0], EdgeKind::Control, "body"));
  auto collection = find(g, NodeKind::Data, "var", "collection");
  REQUIRE(collection.size() == 2); // parameter and its reference
  CHECK(has_edge(g, collection[0], collection[1], EdgeKind::Data, "ref"));
  CHECK(has_edge(g, collection[1], fors[0], EdgeKind::Data, "cond"));
  auto elem = find(g, NodeKind::Data, "var", "elem");
  REQUIRE(elem.size() == 2);
  CHECK(has_edge(g, elem[0], fors[0], EdgeKind::Data, "cond"));
  CHECK(has_edge(g, elem[1], adds[0], EdgeKind::Data, "para"));
  auto data = find(g, NodeKind::Data, "var", "data");
  REQUIRE(data.size() == 3);
  CHECK(has_edge(g, data[1], adds[0], EdgeKind::Data, "recv"));
  auto set_call = find(g, NodeKind::Operation, "set");
  REQUIRE(set_call.size() == 1);
  CHECK(has_edge(g, set_call[0], data[0], EdgeKind::Data, "def"));
}

TEST_CASE("update call has receiver and parameter edges") {
  Fgpdg g = build("def merge(collection):\n    data = set()\n    data.update(collection)\n");
  check_graph_invariants(g);
  auto update = find(g, NodeKind::Operation, "?.update");
  REQUIRE(update.size() == 1);
  bool recv = false, para = false;
  for (const auto &e : g.edges) {
    if (e.dst != update[0])
      continue;
    const auto &src = g.nodes[static_cast<size_t>(e.src)];
    recv |= e.label == "recv" && src.concrete_name == "data";
    para |= e.label == "para" && src.concrete_name == "collection";
  }
  CHECK(recv);
  CHECK(para);
}

TEST_CASE("pass body yields an empty graph") {
  Fgpdg g = build("def f(a, b):\n    pass\n");
  CHECK(g.nodes.empty());
  CHECK(g.edges.empty());
}

TEST_CASE("straight-line fresh assignments produce one def edge each") {
  for (int n = 1; n <= 6; ++n) {
    std::string src = "def f():\n";
    for (int i = 0; i < n; ++i)
      src += "    v" + std::to_string(i) + " = " + std::to_string(i) + "\n";
    Fgpdg g = build(src);
    CHECK(count_label(g, "def") == n);
  }
}

TEST_CASE("resolve_callee") {
  auto imports = build_import_table(parse_source("import numpy as np\nimport copy\n"));
  auto call_of = [](const std::string &expr) {
    auto module = parse_source(expr);
    int call = -1;
    for (int i = 0; i < module.size(); ++i)
      if (module.node(i).kind == SyntaxKind::Call) {
        call = i;
        break;
      }
    REQUIRE(call >= 0);
    return module.subtree(call);
  };
  CHECK(resolve_callee(call_of("np.zeros(3)"), imports) == "numpy.zeros");
  CHECK(resolve_callee(call_of("obj.copy()"), imports) == "?.copy");
  CHECK(resolve_callee(call_of("set()"), imports) == "set");
  CHECK(resolve_callee(call_of("copy.deepcopy(x)"), imports) == "copy.deepcopy");
  CHECK(resolve_callee(call_of("f()()"), imports) == "?.__call__");
  CHECK(resolve_callee(call_of("a[0].append(1)"), imports) == "?.append");
  CHECK(resolve_callee(call_of("np.linalg.norm(v)"), imports) == "numpy.linalg.norm");
}

TEST_CASE("method calls on self resolve through class context") {
  const char *src = "import unittest\n"
                    "class T(unittest.TestCase):\n"
                    "    def helper(self):\n        return 1\n"
                    "    def test_it(self):\n"
                    "        self.assertNotEqual(self.helper(), 2)\n"
                    "        self.other.run()\n";
  Fgpdg g = build(src);
  check_graph_invariants(g);
  CHECK(find(g, NodeKind::Operation, "unittest.TestCase.assertNotEqual").size() == 1);
  CHECK(find(g, NodeKind::Operation, "m.T.helper").size() == 1);
  CHECK(find(g, NodeKind::Operation, "?.run").size() == 1);
}

TEST_CASE("module attributes become constants and calls fold qualifiers") {
  Fgpdg g = build("import os\ndef f(p):\n    if os.path.exists(p):\n        return p + os.sep\n");
  check_graph_invariants(g);
  auto exists = find(g, NodeKind::Operation, "os.path.exists");
  auto ifs = find(g, NodeKind::Control, "if");
  REQUIRE(exists.size() == 1);
  REQUIRE(ifs.size() == 1);
  CHECK(has_edge(g, exists[0], ifs[0], EdgeKind::Data, "cond"));
  CHECK(find(g, NodeKind::Data, "os.sep").size() == 1);
  // The qualifier chain is folded into the label: no receiver edge.
  for (const auto &e : g.edges)
    CHECK_FALSE((e.dst == exists[0] && e.label == "recv"));
}

TEST_CASE("augmented assignment expands to binop and def") {
  Fgpdg g = build("def f(xs):\n    t = 0\n    for x in xs:\n        t += x\n    return t\n");
  check_graph_invariants(g);
  auto plus = find(g, NodeKind::Operation, "+");
  REQUIRE(plus.size() == 1);
  CHECK(g.nodes[static_cast<size_t>(plus[0])].subkind == "binop");
  int defs_from_plus = 0;
  for (const auto &e : g.edges)
    defs_from_plus += e.src == plus[0] && e.label == "def";
  CHECK(defs_from_plus == 1);
}

TEST_CASE("comprehension, try, with and conditional expressions") {
  const char *src = "import json\n"
                    "def f(items, path):\n"
                    "    squares = [i * i for i in items if i]\n"
                    "    try:\n"
                    "        with open(path) as fh:\n"
                    "            cfg = json.load(fh)\n"
                    "    except (IOError, ValueError) as err:\n"
                    "        cfg = {'error': str(err)}\n"
                    "    else:\n"
                    "        cfg['ok'] = True\n"
                    "    value = cfg.get('x') if cfg else None\n"
                    "    return squares[1:], value, lambda y: y\n";
  Fgpdg g = build(src);
  check_graph_invariants(g);
  CHECK(find(g, NodeKind::Control, "for").size() == 1);
  CHECK(find(g, NodeKind::Operation, "list").size() == 1);
  auto handler = find(g, NodeKind::Control, "except IOError,ValueError");
  REQUIRE(handler.size() == 1);
  auto tries = find(g, NodeKind::Control, "try");
  REQUIRE(tries.size() == 1);
  CHECK(has_edge(g, tries[0], handler[0], EdgeKind::Control, "body"));
  auto withs = find(g, NodeKind::Control, "with");
  REQUIRE(withs.size() == 1);
  CHECK(has_edge(g, tries[0], withs[0], EdgeKind::Control, "body"));
  auto load = find(g, NodeKind::Operation, "json.load");
  REQUIRE(load.size() == 1);
  CHECK(has_edge(g, withs[0], load[0], EdgeKind::Control, "body"));
  CHECK(find(g, NodeKind::Operation, "[x:]").size() == 1);
  CHECK(find(g, NodeKind::Data, "lambda").size() == 1);
}

TEST_CASE("builds are deterministic") {
  const char *src = "def f(a, b):\n    c = a + b\n    if c > 3:\n        a = g(c)\n"
                    "    else:\n        b = h(c, a)\n    return k(a, b)\n";
  Fgpdg g1 = build(src);
  Fgpdg g2 = build(src);
  CHECK(g1 == g2);
  check_graph_invariants(g1);
  // Both branch definitions of a reach the final use.
  auto k = find(g1, NodeKind::Operation, "k");
  REQUIRE(k.size() == 1);
  auto avars = find(g1, NodeKind::Data, "var", "a");
  int refs_into_last_a = 0;
  for (const auto &e : g1.edges)
    refs_into_last_a += e.dst == avars.back() && e.label == "ref";
  CHECK(refs_into_last_a == 2);
}

TEST_CASE("unsupported units are rejected") {
  auto unit = only_unit("def g():\n    yield 1\n");
  CHECK_FALSE(unit.supported);
  CHECK_THROWS_AS(build_fgpdg(unit, ImportTable{}), UnsupportedConstruct);
}
