#include "changeminer/pattern_miner.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

namespace changeminer {
namespace {

struct Arc {
  int rel;
  int dir; // 0 outgoing, 1 incoming
  int nb;
};

/// Pattern graph reduced to string labels and relation ids.
struct Labeled {
  int n = 0;
  std::vector<std::string> labels;
  std::vector<std::string> rels; // sorted distinct relation names
  std::vector<std::tuple<int, int, int>> edges; // src, dst, rel id
  std::vector<std::vector<Arc>> adj;
};

std::string relation_name(const FgEdge &e) {
  return std::string(e.kind == EdgeKind::Control ? "C:" : "D:") + e.label;
}

Labeled labeled(const PatternGraph &p) {
  Labeled g;
  g.n = p.size();
  for (const auto &node : p.nodes)
    g.labels.push_back(node.match_label());
  std::vector<std::tuple<int, int, std::string>> raw;
  for (const auto &e : p.edges)
    raw.emplace_back(e.src, e.dst, relation_name(e));
  for (auto [b, a] : p.map_edges)
    raw.emplace_back(b, a, "M");
  std::set<std::string> rels;
  for (const auto &r : raw)
    rels.insert(std::get<2>(r));
  g.rels.assign(rels.begin(), rels.end());
  g.adj.resize(static_cast<size_t>(g.n));
  for (const auto &[s, d, r] : raw) {
    int id = static_cast<int>(std::lower_bound(g.rels.begin(), g.rels.end(), r) - g.rels.begin());
    g.edges.emplace_back(s, d, id);
    g.adj[static_cast<size_t>(s)].push_back({id, 0, d});
    g.adj[static_cast<size_t>(d)].push_back({id, 1, s});
  }
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
  return g;
}

// Colours are positions: a cell of k nodes with colour c occupies c..c+k-1.
std::vector<int> initial_colors(const Labeled &g) {
  std::vector<int> colors(static_cast<size_t>(g.n));
  for (int x = 0; x < g.n; ++x) {
    int smaller = 0;
    for (int y = 0; y < g.n; ++y)
      smaller += g.labels[static_cast<size_t>(y)] < g.labels[static_cast<size_t>(x)];
    colors[static_cast<size_t>(x)] = smaller;
  }
  return colors;
}

int count_cells(const std::vector<int> &colors) {
  std::set<int> s(colors.begin(), colors.end());
  return static_cast<int>(s.size());
}

void refine(const Labeled &g, std::vector<int> &colors) {
  using Sig = std::pair<int, std::vector<std::tuple<int, int, int>>>;
  int cells = count_cells(colors);
  while (true) {
    std::vector<Sig> sig(static_cast<size_t>(g.n));
    for (int x = 0; x < g.n; ++x) {
      Sig &s = sig[static_cast<size_t>(x)];
      s.first = colors[static_cast<size_t>(x)];
      for (const Arc &a : g.adj[static_cast<size_t>(x)])
        s.second.emplace_back(a.rel, a.dir, colors[static_cast<size_t>(a.nb)]);
      std::sort(s.second.begin(), s.second.end());
    }
    std::vector<int> order(static_cast<size_t>(g.n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return sig[static_cast<size_t>(a)] < sig[static_cast<size_t>(b)]; });
    std::vector<int> next(static_cast<size_t>(g.n));
    for (size_t i = 0; i < order.size(); ++i) {
      if (i > 0 && sig[static_cast<size_t>(order[i])] == sig[static_cast<size_t>(order[i - 1])])
        next[static_cast<size_t>(order[i])] = next[static_cast<size_t>(order[i - 1])];
      else
        next[static_cast<size_t>(order[i])] = static_cast<int>(i);
    }
    colors = std::move(next);
    int now = count_cells(colors);
    if (now == cells)
      return;
    cells = now;
  }
}

class Searcher {
public:
  explicit Searcher(const Labeled &g) : g_(g) {}

  void run() {
    std::vector<int> colors = initial_colors(g_);
    std::vector<int> prefix;
    search(std::move(colors), prefix);
  }

  const std::vector<std::tuple<int, int, int>> &best_edges() const { return best_; }
  const std::vector<int> &best_order() const { return best_order_; }

private:
  void search(std::vector<int> colors, std::vector<int> &prefix) {
    refine(g_, colors);
    // First non-singleton cell in colour order.
    std::map<int, std::vector<int>> cells;
    for (int x = 0; x < g_.n; ++x)
      cells[colors[static_cast<size_t>(x)]].push_back(x);
    const std::vector<int> *target = nullptr;
    for (const auto &[c, members] : cells)
      if (members.size() > 1) {
        target = &members;
        break;
      }
    if (!target) {
      leaf(colors);
      return;
    }
    std::vector<int> tried;
    for (int v : *target) {
      if (!tried.empty() && same_orbit(v, tried, prefix))
        continue;
      std::vector<int> next = colors;
      int c = colors[static_cast<size_t>(v)];
      for (int x = 0; x < g_.n; ++x)
        if (x != v && colors[static_cast<size_t>(x)] == c)
          next[static_cast<size_t>(x)] = c + 1;
      prefix.push_back(v);
      search(std::move(next), prefix);
      prefix.pop_back();
      tried.push_back(v);
    }
  }

  bool same_orbit(int v, const std::vector<int> &tried, const std::vector<int> &prefix) const {
    std::vector<int> parent(static_cast<size_t>(g_.n));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[static_cast<size_t>(x)] != x)
        x = parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
      return x;
    };
    for (const auto &gamma : autos_) {
      bool fixes = std::all_of(prefix.begin(), prefix.end(),
                               [&](int p) { return gamma[static_cast<size_t>(p)] == p; });
      if (!fixes)
        continue;
      for (int x = 0; x < g_.n; ++x)
        parent[static_cast<size_t>(find(x))] = find(gamma[static_cast<size_t>(x)]);
    }
    int rv = find(v);
    return std::any_of(tried.begin(), tried.end(), [&](int u) { return find(u) == rv; });
  }

  void leaf(const std::vector<int> &colors) {
    std::vector<int> order(static_cast<size_t>(g_.n));
    for (int x = 0; x < g_.n; ++x)
      order[static_cast<size_t>(colors[static_cast<size_t>(x)])] = x;
    std::vector<std::tuple<int, int, int>> edges;
    edges.reserve(g_.edges.size());
    for (auto [s, d, r] : g_.edges)
      edges.emplace_back(colors[static_cast<size_t>(s)], colors[static_cast<size_t>(d)], r);
    std::sort(edges.begin(), edges.end());
    if (!have_ || edges < best_) {
      have_ = true;
      best_ = std::move(edges);
      best_order_ = std::move(order);
    } else if (edges == best_) {
      std::vector<int> gamma(static_cast<size_t>(g_.n));
      for (size_t i = 0; i < order.size(); ++i)
        gamma[static_cast<size_t>(order[i])] = best_order_[i];
      autos_.push_back(std::move(gamma));
    }
  }

  const Labeled &g_;
  bool have_ = false;
  std::vector<std::tuple<int, int, int>> best_;
  std::vector<int> best_order_;
  std::vector<std::vector<int>> autos_;
};

void append_field(std::string &out, const std::string &s) {
  out += std::to_string(s.size());
  out += ':';
  out += s;
}

std::uint64_t fnv1a(std::string_view s, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

using EdgeBag = std::map<std::pair<int, int>, std::vector<std::string>>;

EdgeBag edge_bag(const PatternGraph &p) {
  EdgeBag bag;
  for (const auto &e : p.edges)
    bag[{e.src, e.dst}].push_back(relation_name(e));
  for (auto [b, a] : p.map_edges)
    bag[{b, a}].push_back("M");
  for (auto &[k, v] : bag)
    std::sort(v.begin(), v.end());
  return bag;
}

} // namespace

std::string PatternNode::match_label() const {
  std::string s(to_string(version));
  s += '|';
  s += to_string(kind);
  s += '|';
  s += subkind;
  s += '|';
  s += label;
  s += changed ? "|1" : "|0";
  return s;
}

bool PatternGraph::has_changed_node() const {
  return std::any_of(nodes.begin(), nodes.end(), [](const PatternNode &n) { return n.changed; });
}

std::vector<std::pair<int, int>> PatternGraph::call_pairs() const {
  std::vector<std::pair<int, int>> out;
  for (auto [b, a] : map_edges)
    if (nodes[static_cast<size_t>(b)].is_call() && nodes[static_cast<size_t>(a)].is_call())
      out.emplace_back(b, a);
  std::sort(out.begin(), out.end());
  return out;
}

PatternGraph induced_pattern(const ChangeGraph &g, const std::vector<int> &nodes) {
  std::map<int, int> pos;
  for (size_t i = 0; i < nodes.size(); ++i)
    pos[nodes[i]] = static_cast<int>(i);
  PatternGraph p;
  for (int id : nodes) {
    const FgNode &n = g.nodes.at(static_cast<size_t>(id));
    p.nodes.push_back(PatternNode{n.version, n.kind, n.subkind, n.label, g.is_changed(id)});
  }
  for (const auto &e : g.edges) {
    auto s = pos.find(e.src), d = pos.find(e.dst);
    if (s != pos.end() && d != pos.end())
      p.edges.push_back(FgEdge{s->second, d->second, e.kind, e.label});
  }
  for (auto [b, a] : g.map_edges) {
    auto s = pos.find(b), d = pos.find(a);
    if (s != pos.end() && d != pos.end())
      p.map_edges.emplace_back(s->second, d->second);
  }
  auto edge_key = [](const FgEdge &e) { return std::tie(e.src, e.dst, e.kind, e.label); };
  std::sort(p.edges.begin(), p.edges.end(),
            [&](const FgEdge &a, const FgEdge &b) { return edge_key(a) < edge_key(b); });
  std::sort(p.map_edges.begin(), p.map_edges.end());
  return p;
}

PatternGraph permute(const PatternGraph &p, const std::vector<int> &order) {
  std::vector<int> where(order.size());
  for (size_t i = 0; i < order.size(); ++i)
    where[static_cast<size_t>(order[i])] = static_cast<int>(i);
  PatternGraph out;
  for (int old : order)
    out.nodes.push_back(p.nodes[static_cast<size_t>(old)]);
  for (const auto &e : p.edges)
    out.edges.push_back(FgEdge{where[static_cast<size_t>(e.src)], where[static_cast<size_t>(e.dst)], e.kind, e.label});
  for (auto [b, a] : p.map_edges)
    out.map_edges.emplace_back(where[static_cast<size_t>(b)], where[static_cast<size_t>(a)]);
  auto edge_key = [](const FgEdge &e) { return std::tie(e.src, e.dst, e.kind, e.label); };
  std::sort(out.edges.begin(), out.edges.end(),
            [&](const FgEdge &a, const FgEdge &b) { return edge_key(a) < edge_key(b); });
  std::sort(out.map_edges.begin(), out.map_edges.end());
  return out;
}

std::vector<int> refinement_colors(const PatternGraph &p) {
  Labeled g = labeled(p);
  std::vector<int> colors = initial_colors(g);
  refine(g, colors);
  return colors;
}

CanonicalForm canonical_form(const PatternGraph &p) {
  Labeled g = labeled(p);
  CanonicalForm form;
  form.serialization = "n" + std::to_string(g.n) + ";";
  if (g.n == 0)
    return form;
  Searcher s(g);
  s.run();
  form.order = s.best_order();
  for (int x : form.order)
    append_field(form.serialization, g.labels[static_cast<size_t>(x)]);
  form.serialization += "e;";
  for (auto [a, b, r] : s.best_edges()) {
    form.serialization += std::to_string(a) + "," + std::to_string(b) + ",";
    append_field(form.serialization, g.rels[static_cast<size_t>(r)]);
    form.serialization += ';';
  }
  return form;
}

std::string canonical_key(const PatternGraph &p) {
  std::string ser = canonical_form(p).serialization;
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx",
                static_cast<unsigned long long>(fnv1a(ser, 14695981039346656037ULL)),
                static_cast<unsigned long long>(fnv1a(ser, 0x9e3779b97f4a7c15ULL)));
  return buf;
}

bool isomorphic(const PatternGraph &a, const PatternGraph &b) {
  if (a.size() != b.size() || a.edges.size() != b.edges.size() ||
      a.map_edges.size() != b.map_edges.size())
    return false;
  const int n = a.size();
  EdgeBag ea = edge_bag(a), eb = edge_bag(b);
  auto bag_of = [](const EdgeBag &bag, int x, int y) -> const std::vector<std::string> * {
    auto it = bag.find({x, y});
    return it == bag.end() ? nullptr : &it->second;
  };
  auto same = [](const std::vector<std::string> *x, const std::vector<std::string> *y) {
    if (!x || !y)
      return !x && !y;
    return *x == *y;
  };
  std::vector<std::string> la, lb;
  for (const auto &node : a.nodes)
    la.push_back(node.match_label());
  for (const auto &node : b.nodes)
    lb.push_back(node.match_label());
  std::vector<int> ca = refinement_colors(a), cb = refinement_colors(b);
  {
    auto sa = ca, sb = cb;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    if (sa != sb)
      return false;
  }
  std::vector<int> f(static_cast<size_t>(n), -1);
  std::vector<char> used(static_cast<size_t>(n), 0);
  auto rec = [&](auto &&self, int x) -> bool {
    if (x == n)
      return true;
    for (int y = 0; y < n; ++y) {
      if (used[static_cast<size_t>(y)] || la[static_cast<size_t>(x)] != lb[static_cast<size_t>(y)] ||
          ca[static_cast<size_t>(x)] != cb[static_cast<size_t>(y)])
        continue;
      bool ok = same(bag_of(ea, x, x), bag_of(eb, y, y));
      for (int z = 0; ok && z < x; ++z) {
        int w = f[static_cast<size_t>(z)];
        ok = same(bag_of(ea, x, z), bag_of(eb, y, w)) && same(bag_of(ea, z, x), bag_of(eb, w, y));
      }
      if (!ok)
        continue;
      f[static_cast<size_t>(x)] = y;
      used[static_cast<size_t>(y)] = 1;
      if (self(self, x + 1))
        return true;
      used[static_cast<size_t>(y)] = 0;
    }
    f[static_cast<size_t>(x)] = -1;
    return false;
  };
  return rec(rec, 0);
}

bool is_valid_binding(const PatternGraph &p, const ChangeGraph &g, const std::vector<int> &binding) {
  if (binding.size() != p.nodes.size())
    return false;
  std::map<int, int> where;
  for (size_t i = 0; i < binding.size(); ++i) {
    int id = binding[i];
    if (id < 0 || id >= static_cast<int>(g.nodes.size()) || !where.emplace(id, static_cast<int>(i)).second)
      return false;
  }
  PatternGraph image = induced_pattern(g, binding);
  return image.nodes == p.nodes && edge_bag(image) == edge_bag(p);
}

} // namespace changeminer
