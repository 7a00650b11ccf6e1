#include "changeminer/pattern_miner.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <deque>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>
#include <unordered_set>

namespace changeminer {
namespace {

struct Arc {
  int nb;
  int rel;
  int dir; // 0: edge leaves the node, 1: edge enters it
};

/// Corpus with interned node labels and relations, shared read-only by workers.
struct CorpusIndex {
  const std::vector<ChangeGraph> *graphs = nullptr;
  std::map<std::string, int> label_ids;
  std::vector<PatternNode> label_nodes;
  std::map<std::pair<EdgeKind, std::string>, int> rel_ids;
  std::vector<std::pair<EdgeKind, std::string>> rels;
  int map_rel = -1;
  std::vector<std::vector<int>> labels;            // graph -> node -> label id
  std::vector<std::vector<std::vector<Arc>>> adj;  // graph -> node -> arcs

  int intern_rel(EdgeKind kind, const std::string &label) {
    auto [it, inserted] = rel_ids.emplace(std::make_pair(kind, label), static_cast<int>(rels.size()));
    if (inserted)
      rels.emplace_back(kind, label);
    return it->second;
  }

  int label_of(const PatternNode &n) const {
    auto it = label_ids.find(n.match_label());
    return it == label_ids.end() ? -1 : it->second;
  }
};

PatternNode node_of(const ChangeGraph &g, int id) {
  const FgNode &n = g.nodes[static_cast<size_t>(id)];
  return PatternNode{n.version, n.kind, n.subkind, n.label, g.is_changed(id)};
}

CorpusIndex build_index(const std::vector<ChangeGraph> &corpus) {
  CorpusIndex ix;
  ix.graphs = &corpus;
  // Map edges get their own relation, distinct from any Data/Control label.
  ix.map_rel = ix.intern_rel(EdgeKind::Data, "\x01map");
  for (const auto &g : corpus) {
    std::vector<int> labels;
    for (int id = 0; id < static_cast<int>(g.nodes.size()); ++id) {
      PatternNode pn = node_of(g, id);
      auto [it, inserted] = ix.label_ids.emplace(pn.match_label(), static_cast<int>(ix.label_nodes.size()));
      if (inserted)
        ix.label_nodes.push_back(pn);
      labels.push_back(it->second);
    }
    std::vector<std::vector<Arc>> adj(g.nodes.size());
    for (const auto &e : g.edges) {
      int r = ix.intern_rel(e.kind, e.label);
      adj[static_cast<size_t>(e.src)].push_back({e.dst, r, 0});
      adj[static_cast<size_t>(e.dst)].push_back({e.src, r, 1});
    }
    for (auto [b, a] : g.map_edges) {
      adj[static_cast<size_t>(b)].push_back({a, ix.map_rel, 0});
      adj[static_cast<size_t>(a)].push_back({b, ix.map_rel, 1});
    }
    ix.labels.push_back(std::move(labels));
    ix.adj.push_back(std::move(adj));
  }
  return ix;
}

using Triple = std::array<int, 3>; // template node, relation, direction
using GrowthKey = std::pair<int, std::vector<Triple>>;

struct Canonical {
  PatternGraph graph;
  std::vector<Embedding> embeddings;
  std::string serialization;
};

Canonical canonicalize(PatternGraph g, std::vector<Embedding> embs) {
  CanonicalForm form = canonical_form(g);
  Canonical c;
  c.graph = permute(g, form.order);
  for (auto &e : embs) {
    std::vector<int> nodes;
    nodes.reserve(form.order.size());
    for (int old : form.order)
      nodes.push_back(e.nodes[static_cast<size_t>(old)]);
    e.nodes = std::move(nodes);
  }
  std::sort(embs.begin(), embs.end());
  embs.erase(std::unique(embs.begin(), embs.end()), embs.end());
  c.embeddings = std::move(embs);
  c.serialization = std::move(form.serialization);
  return c;
}

std::vector<Growth> extend_indexed(const CorpusIndex &ix, const PatternGraph &p,
                                   const std::vector<Embedding> &embeddings, const MiningConfig &cfg) {
  if (p.size() >= cfg.max_size)
    return {};
  std::map<GrowthKey, std::vector<Embedding>> groups;
  std::map<int, std::vector<Triple>> touching;
  for (const Embedding &emb : embeddings) {
    touching.clear();
    const auto &adj = ix.adj[static_cast<size_t>(emb.graph)];
    for (size_t t = 0; t < emb.nodes.size(); ++t)
      for (const Arc &a : adj[static_cast<size_t>(emb.nodes[t])]) {
        if (std::find(emb.nodes.begin(), emb.nodes.end(), a.nb) != emb.nodes.end())
          continue;
        touching[a.nb].push_back({static_cast<int>(t), a.rel, a.dir});
      }
    for (auto &[w, triples] : touching) {
      std::sort(triples.begin(), triples.end());
      GrowthKey key{ix.labels[static_cast<size_t>(emb.graph)][static_cast<size_t>(w)], triples};
      Embedding grown = emb;
      grown.nodes.push_back(w);
      groups[std::move(key)].push_back(std::move(grown));
    }
  }

  struct Candidate {
    const GrowthKey *key;
    std::vector<Embedding> *embs;
    PatternGraph graph;
    int support;
  };
  std::vector<Candidate> candidates;
  const int new_id = p.size();
  for (auto &[key, embs] : groups) {
    PatternGraph g = p;
    g.nodes.push_back(ix.label_nodes[static_cast<size_t>(key.first)]);
    for (const Triple &t : key.second) {
      int src = t[2] == 0 ? t[0] : new_id;
      int dst = t[2] == 0 ? new_id : t[0];
      if (t[1] == ix.map_rel) {
        g.map_edges.emplace_back(src, dst);
      } else {
        const auto &[kind, label] = ix.rels[static_cast<size_t>(t[1])];
        g.edges.push_back(FgEdge{src, dst, kind, label});
      }
    }
    std::sort(g.map_edges.begin(), g.map_edges.end());
    int support = pattern_support(g, embs);
    if (support >= cfg.min_freq)
      candidates.push_back(Candidate{&key, &embs, std::move(g), support});
  }
  // Most frequent first; the group map already orders ties by key.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate &a, const Candidate &b) { return a.support > b.support; });
  if (static_cast<int>(candidates.size()) > cfg.max_extensions_per_step)
    candidates.resize(static_cast<size_t>(cfg.max_extensions_per_step));
  std::vector<Growth> out;
  for (auto &c : candidates)
    out.push_back(Growth{std::move(c.graph), std::move(*c.embs), c.support});
  return out;
}

bool changed_within(const ChangeGraph &g, const std::vector<std::vector<Arc>> &adj,
                    std::initializer_list<int> start, int hops) {
  std::vector<int> dist(g.nodes.size(), -1);
  std::deque<int> queue;
  for (int s : start) {
    dist[static_cast<size_t>(s)] = 0;
    queue.push_back(s);
  }
  while (!queue.empty()) {
    int x = queue.front();
    queue.pop_front();
    if (g.is_changed(x))
      return true;
    if (dist[static_cast<size_t>(x)] >= hops)
      continue;
    for (const Arc &a : adj[static_cast<size_t>(x)])
      if (dist[static_cast<size_t>(a.nb)] < 0) {
        dist[static_cast<size_t>(a.nb)] = dist[static_cast<size_t>(x)] + 1;
        queue.push_back(a.nb);
      }
  }
  return false;
}

std::vector<SeedGroup> collect_seeds_indexed(const CorpusIndex &ix, int max_size) {
  const auto &corpus = *ix.graphs;
  std::map<std::pair<std::string, std::string>, std::pair<std::vector<Embedding>, bool>> groups;
  for (int gi = 0; gi < static_cast<int>(corpus.size()); ++gi) {
    const ChangeGraph &g = corpus[static_cast<size_t>(gi)];
    for (auto [b, a] : g.map_edges) {
      PatternNode nb = node_of(g, b), na = node_of(g, a);
      if (!nb.is_call() || !na.is_call())
        continue;
      auto &entry = groups[{nb.match_label(), na.match_label()}];
      entry.first.push_back(Embedding{gi, {b, a}});
      if (!entry.second)
        entry.second = changed_within(g, ix.adj[static_cast<size_t>(gi)], {b, a}, max_size);
    }
  }
  std::vector<SeedGroup> out;
  for (auto &[key, entry] : groups)
    if (entry.second)
      out.push_back(SeedGroup{key.first, key.second, std::move(entry.first)});
  return out;
}

struct Found {
  PatternGraph graph;
  std::vector<Embedding> embeddings;
  std::string serialization;
  int support = 0;
};

class Miner {
public:
  Miner(const CorpusIndex &ix, const MiningConfig &cfg) : ix_(ix), cfg_(cfg) {}

  void run_seed(const SeedGroup &seed) {
    const ChangeGraph &g0 = (*ix_.graphs)[static_cast<size_t>(seed.instances.front().graph)];
    PatternGraph p = induced_pattern(g0, seed.instances.front().nodes);
    if (pattern_support(p, seed.instances) < cfg_.min_freq)
      return;
    Canonical c = canonicalize(std::move(p), seed.instances);
    if (!visit(c.serialization))
      return;
    auto start = std::chrono::steady_clock::now();
    auto deadline = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                std::chrono::duration<double>(cfg_.per_seed_time_budget));
    bool exceeded = false;
    dfs(std::move(c), deadline, exceeded);
    if (exceeded) {
      double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      spdlog::warn("seed {} -> {}: time budget exceeded, keeping partial results", seed.before_label,
                   seed.after_label);
      std::lock_guard lock(mutex_);
      budget_.push_back(BudgetExceeded{seed.before_label + " -> " + seed.after_label, secs});
    }
  }

  std::vector<Found> take_found() { return std::move(found_); }
  std::vector<BudgetExceeded> take_budget() { return std::move(budget_); }

private:
  bool visit(const std::string &ser) {
    std::lock_guard lock(mutex_);
    return visited_.insert(ser).second;
  }

  void dfs(Canonical c, std::chrono::steady_clock::time_point deadline, bool &exceeded) {
    if (exceeded || std::chrono::steady_clock::now() > deadline) {
      exceeded = true;
      return;
    }
    int support = pattern_support(c.graph, c.embeddings);
    auto growths = extend_indexed(ix_, c.graph, c.embeddings, cfg_);
    if (c.graph.size() >= cfg_.min_size && c.graph.has_changed_node()) {
      std::lock_guard lock(mutex_);
      found_.push_back(Found{c.graph, c.embeddings, c.serialization, support});
    }
    c.embeddings.clear();
    for (auto &gr : growths) {
      Canonical next = canonicalize(std::move(gr.graph), std::move(gr.embeddings));
      if (!visit(next.serialization))
        continue;
      dfs(std::move(next), deadline, exceeded);
      if (exceeded)
        return;
    }
  }

  const CorpusIndex &ix_;
  const MiningConfig &cfg_;
  std::mutex mutex_;
  std::unordered_set<std::string> visited_;
  std::vector<Found> found_;
  std::vector<BudgetExceeded> budget_;
};

void sort_patterns(std::vector<Pattern> &ps) {
  std::sort(ps.begin(), ps.end(), [](const Pattern &a, const Pattern &b) {
    if (a.support != b.support)
      return a.support > b.support;
    if (a.graph.size() != b.graph.size())
      return a.graph.size() > b.graph.size();
    return a.canonical_key < b.canonical_key;
  });
}

} // namespace

void MiningConfig::validate() const {
  if (min_size < 2)
    throw std::invalid_argument("min_size must be at least 2");
  if (min_freq < 2)
    throw std::invalid_argument("min_freq must be at least 2");
  if (max_size < min_size)
    throw std::invalid_argument("max_size must not be smaller than min_size");
  if (max_extensions_per_step < 1)
    throw std::invalid_argument("max_extensions_per_step must be positive");
  if (!(per_seed_time_budget > 0))
    throw std::invalid_argument("per_seed_time_budget must be positive");
  if (jobs < 1)
    throw std::invalid_argument("jobs must be at least 1");
}

size_t PatternSet::sample_count() const {
  size_t n = 0;
  for (const auto &p : patterns)
    n += p.instances.size();
  return n;
}

int pattern_support(const PatternGraph &p, const std::vector<Embedding> &embeddings) {
  auto pairs = p.call_pairs();
  if (pairs.empty())
    return 0;
  size_t best = SIZE_MAX;
  std::vector<std::array<int, 3>> images;
  for (auto [b, a] : pairs) {
    images.clear();
    for (const auto &e : embeddings)
      images.push_back({e.graph, e.nodes[static_cast<size_t>(b)], e.nodes[static_cast<size_t>(a)]});
    std::sort(images.begin(), images.end());
    size_t distinct = static_cast<size_t>(std::unique(images.begin(), images.end()) - images.begin());
    best = std::min(best, distinct);
  }
  return static_cast<int>(best);
}

std::vector<SeedGroup> collect_seeds(const std::vector<ChangeGraph> &corpus, int max_size) {
  return collect_seeds_indexed(build_index(corpus), max_size);
}

std::vector<Growth> extend(const std::vector<ChangeGraph> &corpus, const PatternGraph &p,
                           const std::vector<Embedding> &embeddings, const MiningConfig &cfg) {
  return extend_indexed(build_index(corpus), p, embeddings, cfg);
}

PatternSet mine(const std::vector<ChangeGraph> &corpus, const MiningConfig &cfg) {
  cfg.validate();
  PatternSet result;
  if (corpus.empty())
    return result;
  CorpusIndex ix = build_index(corpus);
  std::vector<SeedGroup> seeds = collect_seeds_indexed(ix, cfg.max_size);
  Miner miner(ix, cfg);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < seeds.size(); i = next++)
      miner.run_seed(seeds[i]);
  };
  if (cfg.jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < cfg.jobs; ++t)
      threads.emplace_back(worker);
    for (auto &t : threads)
      t.join();
  }
  std::vector<Found> found = miner.take_found();
  std::sort(found.begin(), found.end(),
            [](const Found &a, const Found &b) { return a.serialization < b.serialization; });

  // Digest collisions between non-isomorphic graphs get a numeric suffix.
  std::map<std::string, std::vector<const PatternGraph *>> by_key;
  for (auto &f : found) {
    Pattern p;
    p.graph = f.graph;
    p.canonical_key = canonical_key(f.graph);
    auto &seen = by_key[p.canonical_key];
    for (const PatternGraph *other : seen)
      if (!isomorphic(*other, f.graph)) {
        p.canonical_key += "-" + std::to_string(seen.size() + 1);
        break;
      }
    seen.push_back(&f.graph);
    p.support = f.support;
    p.embeddings = std::move(f.embeddings);

    auto seed = p.graph.call_pairs().front();
    std::set<std::array<int, 3>> seen_images;
    std::set<std::string> projects;
    for (const Embedding &e : p.embeddings) {
      std::array<int, 3> image{e.graph, e.nodes[static_cast<size_t>(seed.first)],
                               e.nodes[static_cast<size_t>(seed.second)]};
      if (!seen_images.insert(image).second)
        continue;
      const ChangeGraph &g = corpus[static_cast<size_t>(e.graph)];
      p.instances.push_back(PatternInstance{g.id, g.provenance.repo_id, e.nodes, e.graph});
      projects.insert(g.provenance.repo_id);
    }
    p.project_ids.assign(projects.begin(), projects.end());
    result.patterns.push_back(std::move(p));
  }
  result.budget_exceeded = miner.take_budget();
  std::sort(result.budget_exceeded.begin(), result.budget_exceeded.end(),
            [](const BudgetExceeded &a, const BudgetExceeded &b) { return a.seed < b.seed; });

  if (!cfg.keep_subpatterns)
    result = filter_maximal(std::move(result));
  if (cfg.cross_project_only)
    result = filter_cross_project(std::move(result));
  sort_patterns(result.patterns);
  return result;
}

PatternSet filter_maximal(PatternSet ps) {
  // Node sets covered by each pattern, per graph.
  using Cover = std::map<int, std::vector<std::vector<int>>>;
  auto sorted = [](std::vector<int> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  std::vector<Cover> covers(ps.patterns.size());
  for (size_t i = 0; i < ps.patterns.size(); ++i) {
    const Pattern &p = ps.patterns[i];
    Cover &c = covers[i];
    if (!p.embeddings.empty())
      for (const auto &e : p.embeddings)
        c[e.graph].push_back(sorted(e.nodes));
    else
      for (const auto &inst : p.instances)
        c[inst.graph].push_back(sorted(inst.binding));
    for (auto &[g, sets] : c) {
      std::sort(sets.begin(), sets.end());
      sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
    }
  }
  auto covered_by = [&](size_t pi, size_t qi) {
    const Cover &q = covers[qi];
    for (const auto &inst : ps.patterns[pi].instances) {
      auto it = q.find(inst.graph);
      if (it == q.end())
        return false;
      std::vector<int> need = sorted(inst.binding);
      bool any = std::any_of(it->second.begin(), it->second.end(), [&](const std::vector<int> &have) {
        return std::includes(have.begin(), have.end(), need.begin(), need.end());
      });
      if (!any)
        return false;
    }
    return true;
  };
  PatternSet out;
  out.budget_exceeded = std::move(ps.budget_exceeded);
  std::vector<char> keep(ps.patterns.size(), 1);
  for (size_t i = 0; i < ps.patterns.size(); ++i)
    for (size_t j = 0; j < ps.patterns.size() && keep[i]; ++j)
      if (ps.patterns[j].graph.size() > ps.patterns[i].graph.size() && covered_by(i, j))
        keep[i] = 0;
  for (size_t i = 0; i < ps.patterns.size(); ++i)
    if (keep[i])
      out.patterns.push_back(std::move(ps.patterns[i]));
  sort_patterns(out.patterns);
  return out;
}

PatternSet filter_cross_project(PatternSet ps) {
  PatternSet out;
  out.budget_exceeded = std::move(ps.budget_exceeded);
  for (auto &p : ps.patterns)
    if (p.project_ids.size() >= 2)
      out.patterns.push_back(std::move(p));
  return out;
}

} // namespace changeminer
