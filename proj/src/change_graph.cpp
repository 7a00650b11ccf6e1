#include "changeminer/change_graph.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <tuple>

namespace changeminer {

bool ChangeGraph::is_changed(int id) const {
  return std::binary_search(changed.begin(), changed.end(), id);
}

namespace {

using EnvEntry = std::tuple<EdgeKind, std::string, bool, std::string>;

std::vector<std::vector<EnvEntry>> environments(const Fgpdg &g) {
  std::vector<std::vector<EnvEntry>> env(g.nodes.size());
  for (const FgEdge &e : g.edges) {
    const std::string &src_label = g.nodes[static_cast<size_t>(e.src)].label;
    const std::string &dst_label = g.nodes[static_cast<size_t>(e.dst)].label;
    env[static_cast<size_t>(e.src)].emplace_back(e.kind, e.label, true, dst_label);
    env[static_cast<size_t>(e.dst)].emplace_back(e.kind, e.label, false, src_label);
  }
  for (auto &v : env)
    std::sort(v.begin(), v.end());
  return env;
}

std::vector<std::vector<int>> adjacency(const Fgpdg &g) {
  std::vector<std::vector<int>> adj(g.nodes.size());
  for (const FgEdge &e : g.edges) {
    adj[static_cast<size_t>(e.src)].push_back(e.dst);
    adj[static_cast<size_t>(e.dst)].push_back(e.src);
  }
  return adj;
}

// Nodes within `hops` undirected edges of any seed.
std::set<int> neighborhood(const Fgpdg &g, const std::set<int> &seeds, int hops) {
  auto adj = adjacency(g);
  std::vector<int> dist(g.nodes.size(), -1);
  std::deque<int> queue;
  for (int s : seeds) {
    dist[static_cast<size_t>(s)] = 0;
    queue.push_back(s);
  }
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    if (dist[static_cast<size_t>(u)] == hops)
      continue;
    for (int v : adj[static_cast<size_t>(u)]) {
      if (dist[static_cast<size_t>(v)] >= 0)
        continue;
      dist[static_cast<size_t>(v)] = dist[static_cast<size_t>(u)] + 1;
      queue.push_back(v);
    }
  }
  std::set<int> out;
  for (size_t i = 0; i < dist.size(); ++i)
    if (dist[i] >= 0)
      out.insert(static_cast<int>(i));
  return out;
}

} // namespace

ChangedNodes mark_changed(const Fgpdg &before, const Fgpdg &after, const NodeMapping &nm) {
  std::vector<int> fwd(before.nodes.size(), -1), bwd(after.nodes.size(), -1);
  for (auto [b, a] : nm) {
    fwd[static_cast<size_t>(b)] = a;
    bwd[static_cast<size_t>(a)] = b;
  }
  auto env_b = environments(before);
  auto env_a = environments(after);
  ChangedNodes out;
  for (size_t b = 0; b < before.nodes.size(); ++b)
    if (fwd[b] < 0)
      out.before.insert(static_cast<int>(b));
  for (size_t a = 0; a < after.nodes.size(); ++a)
    if (bwd[a] < 0)
      out.after.insert(static_cast<int>(a));
  for (auto [b, a] : nm) {
    const FgNode &nb = before.nodes[static_cast<size_t>(b)];
    const FgNode &na = after.nodes[static_cast<size_t>(a)];
    if (nb.label != na.label || nb.subkind != na.subkind ||
        env_b[static_cast<size_t>(b)] != env_a[static_cast<size_t>(a)]) {
      out.before.insert(b);
      out.after.insert(a);
    }
  }
  return out;
}

std::optional<ChangeGraph> build_change_graph(const Fgpdg &before, const Fgpdg &after,
                                              const NodeMapping &nm, const Provenance &prov,
                                              int context_hops) {
  ChangedNodes changed = mark_changed(before, after, nm);
  if (changed.empty())
    return std::nullopt;
  context_hops = std::max(context_hops, 0);

  std::set<int> keep_b = neighborhood(before, changed.before, context_hops);
  std::set<int> keep_a = neighborhood(after, changed.after, context_hops);
  // Context nodes must be mapped; unmapped nodes are changed and already kept.
  // Close the retained set under the mapping.
  for (auto [b, a] : nm) {
    if (keep_b.count(b) || keep_a.count(a)) {
      keep_b.insert(b);
      keep_a.insert(a);
    }
  }

  ChangeGraph cg;
  cg.provenance = prov;
  std::vector<int> id_b(before.nodes.size(), -1), id_a(after.nodes.size(), -1);
  auto take = [&](const Fgpdg &g, const std::set<int> &keep, std::vector<int> &ids, Version v,
                  const std::set<int> &changed_ids) {
    for (int old : keep) {
      int id = static_cast<int>(cg.nodes.size());
      ids[static_cast<size_t>(old)] = id;
      FgNode n = g.nodes[static_cast<size_t>(old)];
      n.id = id;
      n.version = v;
      cg.nodes.push_back(std::move(n));
      if (changed_ids.count(old))
        cg.changed.push_back(id);
    }
    for (const FgEdge &e : g.edges) {
      int s = ids[static_cast<size_t>(e.src)];
      int d = ids[static_cast<size_t>(e.dst)];
      if (s >= 0 && d >= 0)
        cg.edges.push_back(FgEdge{s, d, e.kind, e.label});
    }
  };
  take(before, keep_b, id_b, Version::Before, changed.before);
  take(after, keep_a, id_a, Version::After, changed.after);
  for (auto [b, a] : nm) {
    int nb = id_b[static_cast<size_t>(b)];
    int na = id_a[static_cast<size_t>(a)];
    if (nb >= 0 && na >= 0)
      cg.map_edges.emplace_back(nb, na);
  }
  std::sort(cg.map_edges.begin(), cg.map_edges.end());
  std::sort(cg.changed.begin(), cg.changed.end());
  return cg;
}

std::string hash_author_email(std::string_view email, std::string_view salt) {
  std::uint64_t h = 1469598103934665603ULL;
  auto feed = [&](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  };
  feed(salt);
  feed(":");
  feed(email);
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<size_t>(i)] = digits[h & 0xF];
    h >>= 4;
  }
  return out;
}

} // namespace changeminer
