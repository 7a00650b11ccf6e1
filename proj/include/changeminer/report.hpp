#pragma once

#include "changeminer/origin_classifier.hpp"
#include "changeminer/pattern_miner.hpp"
#include "changeminer/store.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace changeminer {

inline constexpr int kPatternSchemaVersion = 1;

nlohmann::json to_json(const MiningConfig &cfg);

/// Pattern graph in the store's node/edge schema, with a `changed` flag per node.
nlohmann::json pattern_graph_to_json(const PatternGraph &p);
PatternGraph pattern_graph_from_json(const nlohmann::json &j);

/// One pattern as persisted under `pattern-NNNN/`.
struct PatternRecord {
  std::string dir; // "pattern-0001"
  std::string canonical_key;
  int support = 0;
  int size = 0;
  std::vector<std::string> project_ids;
  std::vector<std::string> domain_tags;
  StructuralCategory category = StructuralCategory::UNKNOWN;
  PatternGraph graph;
  std::vector<PatternInstance> instances;

  bool cross_project() const { return project_ids.size() >= 2; }
};

/// Attaches categories and domain tags using the store manifest.
std::vector<PatternRecord> make_records(const PatternSet &ps, const StoreManifest &manifest);

/// Writes summary.json and one directory per pattern. Removes stale
/// pattern directories from earlier runs.
void write_patterns(const std::vector<PatternRecord> &records, const PatternSet &ps, const MiningConfig &cfg,
                    const std::filesystem::path &store_dir, const std::filesystem::path &out);

struct PatternDir {
  nlohmann::json summary;
  std::vector<PatternRecord> records;
};

/// Throws StoreError on missing or mismatched files.
PatternDir load_patterns(const std::filesystem::path &dir);

/// Graphviz source: Before and After clusters, one shape per node kind,
/// dashed map edges, changed nodes filled.
std::string export_dot(const PatternGraph &p, const std::string &title = "pattern");
/// Structured text mirroring the store schema.
std::string export_text(const PatternGraph &p);
PatternGraph parse_text(const std::string &text);

/// index.html plus one page per pattern. `store` may be null; samples whose
/// change graph cannot be found render as a placeholder block.
void render_html(const std::vector<PatternRecord> &records, const LoadedStore *store,
                 const std::filesystem::path &out);

/// Plain-text tables by size, support, category, domain and cross-project status.
std::string stats_report(const std::vector<PatternRecord> &records);

} // namespace changeminer
