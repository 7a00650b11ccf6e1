#pragma once

#include "changeminer/change_graph.hpp"

#include <string>
#include <utility>
#include <vector>

namespace changeminer {

struct MiningConfig {
  int min_size = 4;
  int min_freq = 3;
  int max_size = 20;
  int max_extensions_per_step = 64;
  double per_seed_time_budget = 60.0; // seconds
  bool cross_project_only = false;
  bool keep_subpatterns = false; // skip filter_maximal
  int jobs = 1;

  /// Throws std::invalid_argument when thresholds are inconsistent.
  void validate() const;
};

struct PatternNode {
  Version version = Version::Before;
  NodeKind kind = NodeKind::Data;
  std::string subkind;
  std::string label;
  bool changed = false;

  bool is_call() const { return kind == NodeKind::Operation && subkind == "call"; }
  /// Label used for matching: version, kind, subkind, label and changed flag.
  std::string match_label() const;
  friend bool operator==(const PatternNode &, const PatternNode &) = default;
};

/// Template graph of a change pattern. Size counts nodes of both versions.
struct PatternGraph {
  std::vector<PatternNode> nodes;
  std::vector<FgEdge> edges;                  // within one version
  std::vector<std::pair<int, int>> map_edges; // (before, after)

  int size() const { return static_cast<int>(nodes.size()); }
  bool has_changed_node() const;
  /// Map edges whose endpoints are both calls, sorted.
  std::vector<std::pair<int, int>> call_pairs() const;
  friend bool operator==(const PatternGraph &, const PatternGraph &) = default;
};

/// Subgraph of `g` induced by `nodes` (in that order).
PatternGraph induced_pattern(const ChangeGraph &g, const std::vector<int> &nodes);

struct CanonicalForm {
  std::string serialization; // exact, equal iff isomorphic
  std::vector<int> order;    // order[i] = node placed at canonical position i
};

/// Colour refinement over labels and relations (map edges are their own
/// relation) followed by an individualization search for the lexicographically
/// minimal serialization.
CanonicalForm canonical_form(const PatternGraph &p);
/// 32 hex digits derived from the canonical serialization.
std::string canonical_key(const PatternGraph &p);
/// Stable refinement colours, comparable across graphs of equal size only
/// through their multiset.
std::vector<int> refinement_colors(const PatternGraph &p);
/// `p` renumbered so node i is `order[i]`.
PatternGraph permute(const PatternGraph &p, const std::vector<int> &order);
/// Exact backtracking isomorphism test.
bool isomorphic(const PatternGraph &a, const PatternGraph &b);

/// True when `binding` maps template nodes injectively onto nodes of `g`
/// preserving labels, versions, changed flags, edges and map edges, and no
/// other edges join the bound nodes.
bool is_valid_binding(const PatternGraph &p, const ChangeGraph &g, const std::vector<int> &binding);

struct PatternInstance {
  std::string change_graph_id;
  std::string repo_id;
  std::vector<int> binding; // template node -> change graph node
  int graph = -1;           // index into the mined corpus, -1 when loaded from disk
  friend bool operator==(const PatternInstance &, const PatternInstance &) = default;
};

struct Embedding {
  int graph = 0; // index into the mined corpus
  std::vector<int> nodes;
  friend bool operator==(const Embedding &, const Embedding &) = default;
  friend auto operator<=>(const Embedding &, const Embedding &) = default;
};

struct Pattern {
  PatternGraph graph;
  std::string canonical_key;
  /// Minimum, over the template's call pairs, of the number of distinct
  /// call-pair images across the corpus.
  int support = 0;
  /// One per distinct image of the first call pair.
  std::vector<PatternInstance> instances;
  std::vector<std::string> project_ids;
  /// Every embedding; kept in memory for filtering, never serialized.
  std::vector<Embedding> embeddings;
};

struct BudgetExceeded {
  std::string seed;
  double seconds = 0;
};

struct PatternSet {
  std::vector<Pattern> patterns;
  std::vector<BudgetExceeded> budget_exceeded;
  size_t sample_count() const;
};

struct SeedGroup {
  std::string before_label; // PatternNode::match_label of the Before call
  std::string after_label;
  std::vector<Embedding> instances; // nodes = {before call, after call}
};

/// Mapped call pairs grouped by label pair, sorted by key. Groups where no
/// instance has a changed node within `max_size` hops of the pair are dropped.
std::vector<SeedGroup> collect_seeds(const std::vector<ChangeGraph> &corpus, int max_size);

struct Growth {
  PatternGraph graph;
  std::vector<Embedding> embeddings;
  int support = 0;
};

/// One-node growths of `p` supported by at least `min_freq` call-pair images,
/// most frequent first, at most `max_extensions_per_step` of them.
std::vector<Growth> extend(const std::vector<ChangeGraph> &corpus, const PatternGraph &p,
                           const std::vector<Embedding> &embeddings, const MiningConfig &cfg);

/// Minimum over call pairs of distinct (graph, image) counts; 0 without call pairs.
int pattern_support(const PatternGraph &p, const std::vector<Embedding> &embeddings);

PatternSet mine(const std::vector<ChangeGraph> &corpus, const MiningConfig &cfg);
PatternSet filter_maximal(PatternSet ps);
PatternSet filter_cross_project(PatternSet ps);

} // namespace changeminer
