#pragma once

#include "changeminer/ast_mapper.hpp"
#include "changeminer/fgpdg.hpp"

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace changeminer {

struct Provenance {
  std::string repo_id;
  std::string commit_hash;
  std::string parent_hash;
  std::string file_path;
  std::string function;
  std::string author_email_hash;
  std::string commit_message;

  friend bool operator==(const Provenance &, const Provenance &) = default;
};

/// Function source of one revision, kept for reports.
struct SourceSnippet {
  int start_line = 0;
  std::string text;

  friend bool operator==(const SourceSnippet &, const SourceSnippet &) = default;
};

/// Before and after fgPDGs of one function joined by map edges. Node ids are
/// dense; Before nodes come first.
struct ChangeGraph {
  std::string id;
  std::vector<FgNode> nodes;
  std::vector<FgEdge> edges;                  // within one version
  std::vector<std::pair<int, int>> map_edges; // (before id, after id), sorted
  std::vector<int> changed;                   // sorted
  Provenance provenance;
  SourceSnippet before_source;
  SourceSnippet after_source;

  bool is_changed(int id) const;
  friend bool operator==(const ChangeGraph &, const ChangeGraph &) = default;
};

struct ChangedNodes {
  std::set<int> before;
  std::set<int> after;
  bool empty() const { return before.empty() && after.empty(); }
};

/// A node is changed when it is unmapped, mapped to a node with a different
/// label, or its multiset of (edge kind, label, direction, neighbor label)
/// differs from its partner's.
ChangedNodes mark_changed(const Fgpdg &before, const Fgpdg &after, const NodeMapping &nm);

/// Keeps changed nodes plus mapped unchanged nodes within `context_hops`
/// edges of one, together with the map partners of everything kept.
/// Returns nullopt when nothing changed.
std::optional<ChangeGraph> build_change_graph(const Fgpdg &before, const Fgpdg &after,
                                              const NodeMapping &nm, const Provenance &prov,
                                              int context_hops = 1);

/// Salted 64-bit FNV-1a digest of an author e-mail, as 16 hex digits.
std::string hash_author_email(std::string_view email, std::string_view salt = "changeminer");

} // namespace changeminer
