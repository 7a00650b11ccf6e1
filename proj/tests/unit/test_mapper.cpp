#include <doctest.h>

#include "changeminer/ast_mapper.hpp"
#include "../support/random_python.hpp"

#include <set>

using namespace changeminer;

namespace {

FunctionUnit unit_of(const std::string &src) {
  auto units = extract_functions(parse_source(src), "m");
  REQUIRE(units.size() == 1);
  return units.front();
}

int find_node(const NormalizedAst &t, SyntaxKind kind, const std::string &label, int nth = 0) {
  for (int i = 0; i < t.size(); ++i)
    if (t.node(i).kind == kind && t.node(i).label == label && nth-- == 0)
      return i;
  return -1;
}

void check_mapping_invariants(const NormalizedAst &b, const NormalizedAst &a,
                              const TreeMapping &m) {
  std::set<int> seen_b, seen_a;
  for (auto [x, y] : m.pairs()) {
    CHECK(seen_b.insert(x).second);
    CHECK(seen_a.insert(y).second);
    CHECK(b.node(x).kind == a.node(y).kind);
    CHECK(m.after_of(x) == y);
    CHECK(m.before_of(y) == x);
  }
}

const char *kBefore = "def merge(collection):\n"
                      "    data = set()\n"
                      "    for elem in collection:\n"
                      "        data.add(elem)\n"
                      "    return data\n";
const char *kAfter = "def merge(collection):\n"
                     "    data = set()\n"
                     "    data.update(collection)\n"
                     "    return data\n";

} // namespace

TEST_CASE("identical trees map completely") {
  auto t = parse_source(kBefore);
  auto m = map_asts(t, t);
  CHECK(m.size() == static_cast<size_t>(t.size()));
  for (auto [x, y] : m.pairs())
    CHECK(x == y);
}

TEST_CASE("set update trees map collection and add to update") {
  auto before = unit_of(kBefore).body;
  auto after = unit_of(kAfter).body;
  auto m = map_asts(before, after);
  check_mapping_invariants(before, after, m);
  int add_call = before.node(find_node(before, SyntaxKind::Attribute, "add")).parent;
  int update_call = after.node(find_node(after, SyntaxKind::Attribute, "update")).parent;
  CHECK(m.after_of(add_call) == update_call);
  int iter_use = find_node(before, SyntaxKind::Name, "collection");
  int arg_use = find_node(after, SyntaxKind::Name, "collection");
  CHECK(m.after_of(iter_use) == arg_use);
  CHECK(m.after_of(find_node(before, SyntaxKind::Arg, "collection")) ==
        find_node(after, SyntaxKind::Arg, "collection"));
}

TEST_CASE("trees sharing no kinds below the root map at most the roots") {
  NormalizedAst b, a;
  int bl = b.add_node(SyntaxKind::Name, "x", {}, {});
  int br = b.add_node(SyntaxKind::Literal, "1", {}, {});
  b.finalize(b.add_node(SyntaxKind::Module, "", {bl, br}, {}));
  int al = a.add_node(SyntaxKind::Pass, "", {}, {});
  int ar = a.add_node(SyntaxKind::Break, "", {}, {});
  a.finalize(a.add_node(SyntaxKind::Module, "", {al, ar}, {}));
  auto m = map_asts(b, a);
  CHECK(m.size() <= 1);
  for (auto [x, y] : m.pairs())
    CHECK((x == 0 && y == 0));
}

TEST_CASE("dice coefficient") {
  auto t = parse_source("f(a, b, c, d)");
  int call = find_node(t, SyntaxKind::Call, "");
  TreeMapping full(t.size(), t.size());
  for (int i = 0; i < t.size(); ++i)
    full.link(i, i);
  CHECK(dice(t, t, call, call, full) == doctest::Approx(1.0));
  TreeMapping none(t.size(), t.size());
  CHECK(dice(t, t, call, call, none) == 0.0);
  int leaf = find_node(t, SyntaxKind::Name, "a");
  CHECK(dice(t, t, leaf, leaf, full) == 0.0);

  // |desc(n1)| = 3, |desc(n2)| = 5, two mapped descendant pairs:
  // 2 * 2 / (3 + 5) = 0.5.
  NormalizedAst t1, t2;
  std::vector<int> c1, c2;
  for (int i = 0; i < 3; ++i)
    c1.push_back(t1.add_node(SyntaxKind::Name, "v" + std::to_string(i), {}, {}));
  for (int i = 0; i < 5; ++i)
    c2.push_back(t2.add_node(SyntaxKind::Name, "v" + std::to_string(i), {}, {}));
  t1.finalize(t1.add_node(SyntaxKind::List, "", c1, {}));
  t2.finalize(t2.add_node(SyntaxKind::List, "", c2, {}));
  TreeMapping partial(t1.size(), t2.size());
  partial.link(1, 1);
  partial.link(2, 2);
  CHECK(dice(t1, t2, 0, 0, partial) == doctest::Approx(0.5));
}

TEST_CASE("dice is monotone in mapped descendants") {
  NormalizedAst t1, t2;
  std::vector<int> c1, c2;
  for (int i = 0; i < 6; ++i) {
    c1.push_back(t1.add_node(SyntaxKind::Name, "v", {}, {}));
    c2.push_back(t2.add_node(SyntaxKind::Name, "v", {}, {}));
  }
  t1.finalize(t1.add_node(SyntaxKind::List, "", c1, {}));
  t2.finalize(t2.add_node(SyntaxKind::List, "", c2, {}));
  TreeMapping m(t1.size(), t2.size());
  double last = dice(t1, t2, 0, 0, m);
  for (int k = 1; k <= 6; ++k) {
    m.link(k, 7 - k);
    double d = dice(t1, t2, 0, 0, m);
    CHECK(d >= last);
    last = d;
  }
  CHECK(last == doctest::Approx(1.0));
}

TEST_CASE("random tree pairs: mappings are injective and kind-preserving") {
  for (unsigned seed = 1; seed <= 60; ++seed) {
    testsupport::RandomPython gen(seed);
    auto b = unit_of(gen.function("f", 5)).body;
    auto a = unit_of(gen.function("f", 5)).body;
    auto m = map_asts(b, a);
    check_mapping_invariants(b, a, m);
    auto self = map_asts(b, b);
    CHECK(self.size() == static_cast<size_t>(b.size()));
  }
}

TEST_CASE("project_mapping on identical and changed revisions") {
  auto ub = unit_of(kBefore);
  auto ua = unit_of(kAfter);
  ImportTable imports;
  auto gb = build_fgpdg(ub, imports);
  auto ga = build_fgpdg(ua, imports);

  auto self = project_mapping(map_asts(ub.body, ub.body), gb, gb);
  CHECK(self.size() == gb.nodes.size());

  auto nm = project_mapping(map_asts(ub.body, ua.body), gb, ga);
  std::set<int> seen_b, seen_a;
  bool add_update = false, collection = false;
  for (auto [x, y] : nm) {
    CHECK(seen_b.insert(x).second);
    CHECK(seen_a.insert(y).second);
    const FgNode &nb = gb.nodes[static_cast<size_t>(x)];
    const FgNode &na = ga.nodes[static_cast<size_t>(y)];
    CHECK(nb.kind == na.kind);
    add_update |= nb.label == "?.add" && na.label == "?.update";
    collection |= nb.concrete_name == "collection" && na.concrete_name == "collection" &&
                  ub.body.node(nb.ast_node).kind == SyntaxKind::Name;
  }
  CHECK(add_update);
  CHECK(collection);
}
