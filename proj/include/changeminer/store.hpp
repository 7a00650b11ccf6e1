#pragma once

#include "changeminer/change_graph.hpp"

#include <json.hpp>

#include <filesystem>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace changeminer {

inline constexpr int kStoreSchemaVersion = 1;
inline constexpr const char *kToolVersion = CHANGEMINER_VERSION;

class StoreError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

nlohmann::json node_to_json(const FgNode &n);
FgNode node_from_json(const nlohmann::json &j);
nlohmann::json edge_to_json(const FgEdge &e);
FgEdge edge_from_json(const nlohmann::json &j);

nlohmann::json to_json(const ChangeGraph &g);
ChangeGraph change_graph_from_json(const nlohmann::json &j);

/// Compact single-line JSON with invalid UTF-8 replaced.
std::string dump_line(const nlohmann::json &j);
/// Indented JSON followed by a newline.
std::string dump_pretty(const nlohmann::json &j);

struct RepoSummary {
  std::string repo_id;
  std::string url;
  std::string domain_tag;
  size_t graphs = 0;
  std::string status = "ok"; // "ok" or "failed"
  std::string warning;
  std::vector<std::string> project_modules;
};

struct StoreManifest {
  int schema_version = kStoreSchemaVersion;
  std::string tool_version = kToolVersion;
  nlohmann::json config = nlohmann::json::object();
  size_t record_count = 0;
  std::vector<RepoSummary> repos;
};

nlohmann::json to_json(const StoreManifest &m);
StoreManifest manifest_from_json(const nlohmann::json &j);

/// Collects change graphs and writes them, sorted by (repo, commit, file,
/// function), as `graphs.jsonl` plus `manifest.json` under `root`.
class ChangeGraphStore {
public:
  explicit ChangeGraphStore(std::filesystem::path root);

  const std::filesystem::path &root() const { return root_; }
  void append(ChangeGraph g); // thread-safe
  void add_repo(RepoSummary r);
  void set_config(nlohmann::json config);
  size_t size() const;
  /// Writes the files; returns the manifest written.
  StoreManifest finalize();

private:
  std::filesystem::path root_;
  mutable std::mutex mutex_;
  std::vector<ChangeGraph> graphs_;
  StoreManifest manifest_;
};

struct LoadedStore {
  StoreManifest manifest;
  std::vector<ChangeGraph> graphs;
};

/// Throws StoreError on missing files or a schema version mismatch.
LoadedStore load_store(const std::filesystem::path &root);

} // namespace changeminer
