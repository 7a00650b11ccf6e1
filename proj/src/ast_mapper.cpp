#include "changeminer/ast_mapper.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <map>
#include <queue>
#include <tuple>
#include <unordered_map>

namespace changeminer {

TreeMapping::TreeMapping(int before_size, int after_size)
    : fwd_(static_cast<size_t>(before_size), -1), bwd_(static_cast<size_t>(after_size), -1) {}

bool TreeMapping::link(int b, int a) {
  if (b < 0 || a < 0 || b >= static_cast<int>(fwd_.size()) || a >= static_cast<int>(bwd_.size()))
    return false;
  if (fwd_[static_cast<size_t>(b)] >= 0 || bwd_[static_cast<size_t>(a)] >= 0)
    return false;
  fwd_[static_cast<size_t>(b)] = a;
  bwd_[static_cast<size_t>(a)] = b;
  ++count_;
  return true;
}

std::vector<std::pair<int, int>> TreeMapping::pairs() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(count_);
  for (size_t b = 0; b < fwd_.size(); ++b)
    if (fwd_[b] >= 0)
      out.emplace_back(static_cast<int>(b), fwd_[b]);
  return out;
}

double dice(const NormalizedAst &before, const NormalizedAst &after, int n1, int n2,
            const TreeMapping &partial) {
  int d1 = before.node(n1).size - 1;
  int d2 = after.node(n2).size - 1;
  if (d1 + d2 == 0)
    return 0.0;
  int common = 0;
  for (int k = n1 + 1; k < n1 + 1 + d1; ++k) {
    int a = partial.after_of(k);
    if (a >= 0 && after.is_descendant(a, n2))
      ++common;
  }
  return 2.0 * common / (d1 + d2);
}

namespace {

std::vector<std::uint64_t> subtree_hashes(const NormalizedAst &t) {
  std::vector<std::uint64_t> h(static_cast<size_t>(t.size()));
  for (int i = t.size() - 1; i >= 0; --i) {
    const AstNode &n = t.node(i);
    std::uint64_t x = 1469598103934665603ULL ^ static_cast<std::uint64_t>(n.kind);
    x = (x ^ std::hash<std::string>{}(n.label)) * 1099511628211ULL;
    for (int c : n.children)
      x = (x ^ h[static_cast<size_t>(c)]) * 1099511628211ULL + 0x9e3779b97f4a7c15ULL;
    h[static_cast<size_t>(i)] = x;
  }
  return h;
}

// Nodes grouped by height, highest first.
class HeightQueue {
public:
  explicit HeightQueue(const NormalizedAst &t) : t_(t) {}
  void push(int id) { q_.push({t_.node(id).height, -id}); }
  int max_height() const { return q_.empty() ? 0 : q_.top().first; }
  std::vector<int> pop_max() {
    std::vector<int> out;
    int h = max_height();
    while (!q_.empty() && q_.top().first == h) {
      out.push_back(-q_.top().second);
      q_.pop();
    }
    return out;
  }
  void open(int id) {
    for (int c : t_.node(id).children)
      push(c);
  }

private:
  const NormalizedAst &t_;
  std::priority_queue<std::pair<int, int>> q_;
};

std::vector<int> postorder(const NormalizedAst &t) {
  std::vector<int> out;
  out.reserve(static_cast<size_t>(t.size()));
  std::function<void(int)> walk = [&](int id) {
    for (int c : t.node(id).children)
      walk(c);
    out.push_back(id);
  };
  if (!t.empty())
    walk(0);
  return out;
}

class Mapper {
public:
  Mapper(const NormalizedAst &before, const NormalizedAst &after, const MapperConfig &cfg)
      : b_(before), a_(after), cfg_(cfg), m_(before.size(), after.size()) {}

  TreeMapping run() {
    if (b_.empty() || a_.empty())
      return m_;
    top_down();
    bottom_up();
    recovery();
    return std::move(m_);
  }

private:
  bool parents_mapped(int u, int v) const {
    int pu = b_.node(u).parent;
    int pv = a_.node(v).parent;
    return pu >= 0 && pv >= 0 && m_.after_of(pu) == pv;
  }

  void link_subtrees(int t1, int t2) {
    for (int k = 0; k < b_.node(t1).size; ++k)
      m_.link(t1 + k, t2 + k);
  }

  void top_down() {
    auto h1 = subtree_hashes(b_);
    auto h2 = subtree_hashes(a_);
    std::unordered_map<std::uint64_t, int> count1, count2;
    for (auto h : h1)
      ++count1[h];
    for (auto h : h2)
      ++count2[h];
    auto isomorphic = [&](int t1, int t2) {
      return h1[static_cast<size_t>(t1)] == h2[static_cast<size_t>(t2)] &&
             b_.same_subtree(t1, a_, t2);
    };

    HeightQueue l1(b_), l2(a_);
    l1.push(0);
    l2.push(0);
    std::vector<std::pair<int, int>> ambiguous;
    while (std::min(l1.max_height(), l2.max_height()) >= cfg_.min_height) {
      if (l1.max_height() != l2.max_height()) {
        if (l1.max_height() > l2.max_height())
          for (int t : l1.pop_max())
            l1.open(t);
        else
          for (int t : l2.pop_max())
            l2.open(t);
        continue;
      }
      auto hs1 = l1.pop_max();
      auto hs2 = l2.pop_max();
      std::vector<bool> used1(hs1.size()), used2(hs2.size());
      for (size_t i = 0; i < hs1.size(); ++i) {
        for (size_t j = 0; j < hs2.size(); ++j) {
          int t1 = hs1[i], t2 = hs2[j];
          if (!isomorphic(t1, t2))
            continue;
          std::uint64_t h = h1[static_cast<size_t>(t1)];
          if (count1[h] > 1 || count2[h] > 1)
            ambiguous.emplace_back(t1, t2);
          else
            link_subtrees(t1, t2);
          used1[i] = used2[j] = true;
        }
      }
      for (size_t i = 0; i < hs1.size(); ++i)
        if (!used1[i])
          l1.open(hs1[i]);
      for (size_t j = 0; j < hs2.size(); ++j)
        if (!used2[j])
          l2.open(hs2[j]);
    }
    auto key = [&](const std::pair<int, int> &p) {
      return std::make_tuple(!parents_mapped(p.first, p.second), std::abs(p.first - p.second),
                             p.first, p.second);
    };
    std::sort(ambiguous.begin(), ambiguous.end(),
              [&](const auto &x, const auto &y) { return key(x) < key(y); });
    for (auto [t1, t2] : ambiguous)
      if (!m_.has_before(t1) && !m_.has_after(t2))
        link_subtrees(t1, t2);
  }

  void bottom_up() {
    for (int t1 : postorder(b_)) {
      const AstNode &n1 = b_.node(t1);
      if (m_.has_before(t1) || n1.children.empty())
        continue;
      std::vector<int> candidates;
      for (int k = t1 + 1; k < t1 + n1.size; ++k) {
        int partner = m_.after_of(k);
        if (partner < 0)
          continue;
        for (int p = a_.node(partner).parent; p >= 0; p = a_.node(p).parent)
          if (a_.node(p).kind == n1.kind && !m_.has_after(p))
            candidates.push_back(p);
      }
      std::sort(candidates.begin(), candidates.end());
      candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
      int best = -1;
      double best_dice = -1;
      for (int t2 : candidates) {
        double d = dice(b_, a_, t1, t2, m_);
        if (d < cfg_.dice_threshold)
          continue;
        bool better = d > best_dice ||
                      (d == best_dice && std::abs(t1 - t2) < std::abs(t1 - best));
        if (better) {
          best = t2;
          best_dice = d;
        }
      }
      if (best >= 0)
        m_.link(t1, best);
    }
    if (!m_.has_before(0) && !m_.has_after(0) && b_.node(0).kind == a_.node(0).kind)
      m_.link(0, 0);
  }

  // Sorted (kind, label) token ids of the descendants of each node.
  std::vector<std::vector<int>> descendant_bags(const NormalizedAst &t,
                                                std::map<std::pair<int, std::string>, int> &ids) {
    std::vector<int> token(static_cast<size_t>(t.size()));
    for (int i = 0; i < t.size(); ++i) {
      auto key = std::make_pair(static_cast<int>(t.node(i).kind), t.node(i).label);
      auto [it, inserted] = ids.emplace(key, static_cast<int>(ids.size()));
      token[static_cast<size_t>(i)] = it->second;
    }
    std::vector<std::vector<int>> bags(static_cast<size_t>(t.size()));
    for (int i = 0; i < t.size(); ++i) {
      if (t.node(i).size - 1 > cfg_.max_subtree_compare)
        continue;
      auto &bag = bags[static_cast<size_t>(i)];
      bag.assign(token.begin() + i + 1, token.begin() + i + t.node(i).size);
      std::sort(bag.begin(), bag.end());
    }
    return bags;
  }

  static double bag_similarity(const std::vector<int> &x, const std::vector<int> &y) {
    if (x.empty() && y.empty())
      return 0.0;
    size_t i = 0, j = 0, common = 0;
    while (i < x.size() && j < y.size()) {
      if (x[i] == y[j]) {
        ++common;
        ++i;
        ++j;
      } else if (x[i] < y[j]) {
        ++i;
      } else {
        ++j;
      }
    }
    return 2.0 * static_cast<double>(common) / static_cast<double>(x.size() + y.size());
  }

  void recovery() {
    std::map<std::pair<int, std::string>, int> ids;
    auto bags1 = descendant_bags(b_, ids);
    auto bags2 = descendant_bags(a_, ids);
    std::map<SyntaxKind, std::vector<int>> by_kind;
    for (int v = 0; v < a_.size(); ++v)
      by_kind[a_.node(v).kind].push_back(v);

    for (int u = 0; u < b_.size(); ++u) {
      if (m_.has_before(u))
        continue;
      const AstNode &nu = b_.node(u);
      auto it = by_kind.find(nu.kind);
      if (it == by_kind.end())
        continue;
      bool leaf = nu.children.empty();
      bool small_u = nu.size - 1 <= cfg_.max_subtree_compare;
      int best = -1;
      std::tuple<bool, bool, double, int, int> best_score{};
      for (int v : it->second) {
        if (m_.has_after(v))
          continue;
        const AstNode &nv = a_.node(v);
        if (leaf != nv.children.empty())
          continue;
        bool pm = parents_mapped(u, v);
        bool same_label = nu.label == nv.label;
        double sim = 0.0;
        if (leaf) {
          if (!same_label)
            continue;
        } else {
          bool small = small_u && nv.size - 1 <= cfg_.max_subtree_compare;
          if (!pm && !small)
            continue;
          if (small)
            sim = bag_similarity(bags1[static_cast<size_t>(u)], bags2[static_cast<size_t>(v)]);
          if (!pm && sim < cfg_.dice_threshold)
            continue;
        }
        auto score = std::make_tuple(pm, same_label, sim, -std::abs(u - v), -v);
        if (best < 0 || score > best_score) {
          best = v;
          best_score = score;
        }
      }
      if (best >= 0)
        m_.link(u, best);
    }
  }

  const NormalizedAst &b_;
  const NormalizedAst &a_;
  const MapperConfig &cfg_;
  TreeMapping m_;
};

} // namespace

TreeMapping map_asts(const NormalizedAst &before, const NormalizedAst &after,
                     const MapperConfig &cfg) {
  return Mapper(before, after, cfg).run();
}

NodeMapping project_mapping(const TreeMapping &tm, const Fgpdg &before, const Fgpdg &after) {
  std::map<int, std::vector<int>> by_ast_before, by_ast_after;
  for (const FgNode &n : before.nodes)
    if (n.ast_node >= 0)
      by_ast_before[n.ast_node].push_back(n.id);
  for (const FgNode &n : after.nodes)
    if (n.ast_node >= 0)
      by_ast_after[n.ast_node].push_back(n.id);
  NodeMapping out;
  for (const auto &[ast_b, ids_b] : by_ast_before) {
    int ast_a = tm.after_of(ast_b);
    if (ast_a < 0)
      continue;
    auto it = by_ast_after.find(ast_a);
    if (it == by_ast_after.end())
      continue;
    const auto &ids_a = it->second;
    for (size_t k = 0; k < std::min(ids_b.size(), ids_a.size()); ++k) {
      const FgNode &nb = before.nodes[static_cast<size_t>(ids_b[k])];
      const FgNode &na = after.nodes[static_cast<size_t>(ids_a[k])];
      if (nb.kind == na.kind)
        out.emplace_back(nb.id, na.id);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace changeminer
