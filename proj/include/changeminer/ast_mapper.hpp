#pragma once

#include "changeminer/ast.hpp"
#include "changeminer/fgpdg.hpp"

#include <utility>
#include <vector>

namespace changeminer {

struct MapperConfig {
  int min_height = 2;
  double dice_threshold = 0.5;
  int max_subtree_compare = 100;
};

/// Injective correspondence between nodes of a before and an after tree.
class TreeMapping {
public:
  TreeMapping() = default;
  TreeMapping(int before_size, int after_size);

  /// Adds (b, a); returns false when either node is already mapped.
  bool link(int b, int a);
  int after_of(int b) const { return b >= 0 && b < static_cast<int>(fwd_.size()) ? fwd_[b] : -1; }
  int before_of(int a) const { return a >= 0 && a < static_cast<int>(bwd_.size()) ? bwd_[a] : -1; }
  bool has_before(int b) const { return after_of(b) >= 0; }
  bool has_after(int a) const { return before_of(a) >= 0; }
  size_t size() const { return count_; }
  /// Pairs sorted by before node.
  std::vector<std::pair<int, int>> pairs() const;

private:
  std::vector<int> fwd_;
  std::vector<int> bwd_;
  size_t count_ = 0;
};

/// Pairs of (before fgPDG node id, after fgPDG node id), sorted.
using NodeMapping = std::vector<std::pair<int, int>>;

/// 2 * |mapped descendant pairs| / (|desc(n1)| + |desc(n2)|); 0 when both
/// nodes are leaves.
double dice(const NormalizedAst &before, const NormalizedAst &after, int n1, int n2,
            const TreeMapping &partial);

/// Three phases: top-down isomorphic subtrees, bottom-up containers by dice,
/// then a recovery pass for remaining nodes.
TreeMapping map_asts(const NormalizedAst &before, const NormalizedAst &after,
                     const MapperConfig &cfg = {});

/// Lifts an AST mapping to fgPDG nodes: the k-th node generated by a mapped
/// AST node pairs with the k-th node generated by its partner, when kinds agree.
NodeMapping project_mapping(const TreeMapping &tm, const Fgpdg &before, const Fgpdg &after);

} // namespace changeminer
