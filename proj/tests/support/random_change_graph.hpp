#pragma once

#include "changeminer/change_graph.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace testsupport {

/// Small synthetic change graph over a tiny label alphabet so that structures
/// recur across graphs. Node 0 (Before) and the first After node are calls
/// joined by a map edge.
inline changeminer::ChangeGraph random_change_graph(std::mt19937 &rng, int index, int max_nodes = 12) {
  using namespace changeminer;
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto chance = [&](double p) { return std::bernoulli_distribution(p)(rng); };

  ChangeGraph g;
  const int n = pick(2, max_nodes);
  const int nb = std::max(1, n / 2);
  for (int i = 0; i < n; ++i) {
    FgNode node;
    node.id = i;
    node.version = i < nb ? Version::Before : Version::After;
    int k = (i == 0 || i == nb) ? 0 : pick(0, 2);
    if (k == 0) {
      node.kind = NodeKind::Operation;
      node.subkind = "call";
      node.label = pick(0, 1) ? "f" : "g";
    } else if (k == 1) {
      node.kind = NodeKind::Data;
      node.subkind = "var";
      node.label = "var";
    } else {
      node.kind = NodeKind::Data;
      node.subkind = "literal";
      node.label = "1";
    }
    g.nodes.push_back(node);
  }
  auto add_edges = [&](int lo, int hi) {
    for (int s = lo; s < hi; ++s)
      for (int d = lo; d < hi; ++d)
        if (s != d && chance(0.25))
          g.edges.push_back(FgEdge{s, d, EdgeKind::Data, pick(0, 1) ? "para" : "recv"});
  };
  add_edges(0, nb);
  add_edges(nb, n);

  std::set<int> used_after;
  if (nb < n) {
    g.map_edges.emplace_back(0, nb);
    used_after.insert(nb);
  }
  for (int b = 1; b < nb; ++b) {
    if (!chance(0.7))
      continue;
    for (int a = nb + 1; a < n; ++a)
      if (!used_after.count(a) && g.nodes[static_cast<size_t>(a)].subkind == g.nodes[static_cast<size_t>(b)].subkind) {
        g.map_edges.emplace_back(b, a);
        used_after.insert(a);
        break;
      }
  }
  std::sort(g.map_edges.begin(), g.map_edges.end());
  std::set<int> mapped;
  for (auto [b, a] : g.map_edges) {
    mapped.insert(b);
    mapped.insert(a);
  }
  for (int i = 0; i < n; ++i)
    if (!mapped.count(i) || chance(0.2))
      g.changed.push_back(i);
  for (auto [b, a] : g.map_edges)
    if (g.nodes[static_cast<size_t>(b)].label != g.nodes[static_cast<size_t>(a)].label)
      for (int x : {b, a})
        if (!std::count(g.changed.begin(), g.changed.end(), x))
          g.changed.push_back(x);
  std::sort(g.changed.begin(), g.changed.end());

  static const char *repos[] = {"A", "B", "C"};
  g.provenance.repo_id = repos[pick(0, 2)];
  g.id = "g" + std::to_string(index);
  return g;
}

/// Corpus of mutated copies of one base graph (plus the odd unrelated graph),
/// so that frequent structures actually occur.
inline std::vector<changeminer::ChangeGraph> random_corpus(std::mt19937 &rng, int graphs, int max_nodes = 12) {
  using namespace changeminer;
  auto chance = [&](double p) { return std::bernoulli_distribution(p)(rng); };
  ChangeGraph base = random_change_graph(rng, 0, max_nodes);
  int first_after = 0;
  while (first_after < static_cast<int>(base.nodes.size()) &&
         base.nodes[static_cast<size_t>(first_after)].version == Version::Before)
    ++first_after;
  std::vector<ChangeGraph> out;
  for (int i = 0; i < graphs; ++i) {
    if (chance(0.15)) {
      out.push_back(random_change_graph(rng, i, max_nodes));
      continue;
    }
    // Drop some nodes other than the anchoring call pair.
    std::vector<int> keep, where(base.nodes.size(), -1);
    for (int x = 0; x < static_cast<int>(base.nodes.size()); ++x)
      if (x == 0 || x == first_after || !chance(0.2)) {
        where[static_cast<size_t>(x)] = static_cast<int>(keep.size());
        keep.push_back(x);
      }
    ChangeGraph g;
    for (int x : keep) {
      FgNode n = base.nodes[static_cast<size_t>(x)];
      n.id = where[static_cast<size_t>(x)];
      g.nodes.push_back(n);
    }
    for (const auto &e : base.edges)
      if (where[static_cast<size_t>(e.src)] >= 0 && where[static_cast<size_t>(e.dst)] >= 0 && !chance(0.1))
        g.edges.push_back(FgEdge{where[static_cast<size_t>(e.src)], where[static_cast<size_t>(e.dst)], e.kind, e.label});
    for (auto [b, a] : base.map_edges)
      if (where[static_cast<size_t>(b)] >= 0 && where[static_cast<size_t>(a)] >= 0)
        g.map_edges.emplace_back(where[static_cast<size_t>(b)], where[static_cast<size_t>(a)]);
    for (int c : base.changed)
      if (where[static_cast<size_t>(c)] >= 0 && !chance(0.1))
        g.changed.push_back(where[static_cast<size_t>(c)]);
    std::sort(g.changed.begin(), g.changed.end());
    static const char *repos[] = {"A", "B", "C"};
    g.provenance.repo_id = repos[std::uniform_int_distribution<int>(0, 2)(rng)];
    g.id = "g" + std::to_string(i);
    out.push_back(std::move(g));
  }
  return out;
}

} // namespace testsupport
