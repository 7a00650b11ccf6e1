#pragma once

// Exhaustive reference enumerator for frequent call-anchored change
// subgraphs. It shares nothing with the miner except `canonical_key`, which
// is only used to name the classes it finds.

#include "changeminer/pattern_miner.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace testsupport {

struct OracleGraph {
  std::vector<std::string> labels;
  std::set<std::tuple<int, int, std::string>> edges; // includes map edges as "map"
  std::vector<std::pair<int, int>> call_pairs;
  bool changed = false;
};

inline OracleGraph oracle_graph(const changeminer::ChangeGraph &g, const std::vector<int> &nodes) {
  using namespace changeminer;
  OracleGraph o;
  std::map<int, int> pos;
  for (size_t i = 0; i < nodes.size(); ++i)
    pos[nodes[i]] = static_cast<int>(i);
  for (int id : nodes) {
    const FgNode &n = g.nodes[static_cast<size_t>(id)];
    bool ch = g.is_changed(id);
    o.changed |= ch;
    o.labels.push_back(std::string(to_string(n.version)) + "/" + std::string(to_string(n.kind)) + "/" +
                       n.subkind + "/" + n.label + "/" + (ch ? "c" : "u"));
  }
  for (const auto &e : g.edges)
    if (pos.count(e.src) && pos.count(e.dst))
      o.edges.emplace(pos[e.src], pos[e.dst], std::string(to_string(e.kind)) + e.label);
  for (auto [b, a] : g.map_edges)
    if (pos.count(b) && pos.count(a)) {
      o.edges.emplace(pos[b], pos[a], "map");
      const FgNode &nb = g.nodes[static_cast<size_t>(b)], &na = g.nodes[static_cast<size_t>(a)];
      if (nb.subkind == "call" && na.subkind == "call" && nb.kind == NodeKind::Operation &&
          na.kind == NodeKind::Operation)
        o.call_pairs.emplace_back(pos[b], pos[a]);
    }
  return o;
}

/// Every bijection x -> f[x] from `a` onto `b` preserving labels and edges.
inline std::vector<std::vector<int>> oracle_isomorphisms(const OracleGraph &a, const OracleGraph &b,
                                                         bool first_only) {
  std::vector<std::vector<int>> out;
  const int n = static_cast<int>(a.labels.size());
  if (n != static_cast<int>(b.labels.size()) || a.edges.size() != b.edges.size())
    return out;
  std::vector<int> f(static_cast<size_t>(n), -1);
  std::vector<char> used(static_cast<size_t>(n), 0);
  std::function<void(int)> rec = [&](int x) {
    if (first_only && !out.empty())
      return;
    if (x == n) {
      for (const auto &[s, d, r] : a.edges)
        if (!b.edges.count({f[static_cast<size_t>(s)], f[static_cast<size_t>(d)], r}))
          return;
      out.push_back(f);
      return;
    }
    for (int y = 0; y < n; ++y) {
      if (used[static_cast<size_t>(y)] || a.labels[static_cast<size_t>(x)] != b.labels[static_cast<size_t>(y)])
        continue;
      f[static_cast<size_t>(x)] = y;
      used[static_cast<size_t>(y)] = 1;
      rec(x + 1);
      used[static_cast<size_t>(y)] = 0;
    }
    f[static_cast<size_t>(x)] = -1;
  };
  rec(0);
  return out;
}

struct OracleClass {
  changeminer::PatternGraph pattern; // representative, for keys
  OracleGraph rep;
  std::vector<std::pair<int, std::vector<int>>> occurrences; // (graph, node list)
};

/// canonical key -> support for every connected, call-anchored induced
/// subgraph class with size in [min_size, max_size], support >= min_freq and
/// at least one changed node. Support is the minimum over the class's call
/// pairs of distinct (graph, image) counts across all isomorphisms.
inline std::map<std::string, int> oracle_patterns(const std::vector<changeminer::ChangeGraph> &corpus,
                                                  int min_size, int min_freq, int max_size) {
  std::map<std::pair<std::vector<std::string>, size_t>, std::vector<OracleClass>> buckets;
  for (int gi = 0; gi < static_cast<int>(corpus.size()); ++gi) {
    const auto &g = corpus[static_cast<size_t>(gi)];
    const int n = static_cast<int>(g.nodes.size());
    std::vector<std::vector<int>> adj(static_cast<size_t>(n));
    for (const auto &e : g.edges) {
      adj[static_cast<size_t>(e.src)].push_back(e.dst);
      adj[static_cast<size_t>(e.dst)].push_back(e.src);
    }
    for (auto [b, a] : g.map_edges) {
      adj[static_cast<size_t>(b)].push_back(a);
      adj[static_cast<size_t>(a)].push_back(b);
    }
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
      std::vector<int> nodes;
      for (int i = 0; i < n; ++i)
        if (mask & (1u << i))
          nodes.push_back(i);
      if (static_cast<int>(nodes.size()) > max_size || nodes.size() < 2)
        continue;
      // Connectivity by flood fill inside the mask.
      unsigned seen = 1u << nodes[0];
      std::vector<int> stack{nodes[0]};
      while (!stack.empty()) {
        int x = stack.back();
        stack.pop_back();
        for (int y : adj[static_cast<size_t>(x)])
          if ((mask & (1u << y)) && !(seen & (1u << y))) {
            seen |= 1u << y;
            stack.push_back(y);
          }
      }
      if (seen != mask)
        continue;
      OracleGraph og = oracle_graph(g, nodes);
      if (og.call_pairs.empty())
        continue;
      auto sorted_labels = og.labels;
      std::sort(sorted_labels.begin(), sorted_labels.end());
      auto &bucket = buckets[{sorted_labels, og.edges.size()}];
      OracleClass *home = nullptr;
      for (auto &c : bucket)
        if (!oracle_isomorphisms(c.rep, og, true).empty()) {
          home = &c;
          break;
        }
      if (!home) {
        bucket.push_back(OracleClass{changeminer::induced_pattern(g, nodes), og, {}});
        home = &bucket.back();
      }
      home->occurrences.emplace_back(gi, nodes);
    }
  }

  std::map<std::string, int> out;
  for (auto &[bk, classes] : buckets)
    for (auto &c : classes) {
      int size = static_cast<int>(c.rep.labels.size());
      if (size < min_size || !c.rep.changed)
        continue;
      std::vector<std::set<std::tuple<int, int, int>>> images(c.rep.call_pairs.size());
      for (const auto &[gi, nodes] : c.occurrences) {
        OracleGraph og = oracle_graph(corpus[static_cast<size_t>(gi)], nodes);
        for (const auto &f : oracle_isomorphisms(c.rep, og, false))
          for (size_t k = 0; k < c.rep.call_pairs.size(); ++k) {
            auto [b, a] = c.rep.call_pairs[k];
            images[k].emplace(gi, nodes[static_cast<size_t>(f[static_cast<size_t>(b)])],
                              nodes[static_cast<size_t>(f[static_cast<size_t>(a)])]);
          }
      }
      size_t support = SIZE_MAX;
      for (const auto &s : images)
        support = std::min(support, s.size());
      if (static_cast<int>(support) >= min_freq)
        out[changeminer::canonical_key(c.pattern)] = static_cast<int>(support);
    }
  return out;
}

} // namespace testsupport
