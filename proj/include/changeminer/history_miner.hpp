#pragma once

#include "changeminer/ast_mapper.hpp"
#include "changeminer/change_graph.hpp"
#include "changeminer/git.hpp"
#include "changeminer/source_frontend.hpp"
#include "changeminer/store.hpp"

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace changeminer {

struct RepoSpec {
  std::string repo_id;
  std::string url; // remote URL or local directory
  std::string domain_tag;
};

struct CommitFilter {
  bool skip_merges = true;
  int max_files_per_commit = 50;
  std::string path_glob = "**/*.py";
};

struct MinerConfig {
  CommitFilter filter;
  MapperConfig mapper;
  int context_hops = 1;
  int jobs = 1;
  /// Where remote repositories are cloned; defaults to `<store>/.repos`.
  std::string cache_dir;
};

nlohmann::json to_json(const MinerConfig &cfg);

/// One repository per line: `repo_id url_or_path [domain_tag]`. Blank lines
/// and `#` comments are ignored. Throws std::invalid_argument on malformed
/// lines or duplicate ids.
std::vector<RepoSpec> parse_repos_file(std::string_view text);

/// Shell-style glob on '/'-separated paths: `*` and `?` stay within one
/// component, `**/` matches any number of leading directories.
bool glob_match(std::string_view pattern, std::string_view path);

struct FilePair {
  std::string path;
  std::string before; // raw bytes at the parent
  std::string after;  // raw bytes at the commit
};

/// Modified files of a non-root commit that match the filter, read against
/// the first parent. Empty when the commit is filtered out.
std::vector<FilePair> pair_modified_files(const GitRepository &repo, BlobReader &blobs,
                                          const CommitInfo &commit, const CommitFilter &filter);

/// Pairs functions with equal qualified names.
std::vector<std::pair<const FunctionUnit *, const FunctionUnit *>>
match_functions(const std::vector<FunctionUnit> &before, const std::vector<FunctionUnit> &after);

/// "<repo>/<commit[:12]>/<path>::<function>".
std::string record_id(const Provenance &prov);

/// Change graphs for every changed, supported function of one file pair.
/// `base` supplies the commit-level provenance. Throws SyntaxError if either
/// revision does not parse.
std::vector<ChangeGraph> change_graphs_for_file(const FilePair &pair, const Provenance &base,
                                                const MinerConfig &cfg);

/// Root module names of the Python files tracked at HEAD.
std::vector<std::string> project_modules(const GitRepository &repo);

/// Mines one repository into `store`; returns its summary. Throws
/// RepoUnavailable when the repository cannot be opened or cloned.
RepoSummary mine_repository(const RepoSpec &spec, const MinerConfig &cfg, ChangeGraphStore &store);

/// Mines every repository, recording unavailable ones as failed with a
/// warning, then writes the store.
StoreManifest mine_repositories(const std::vector<RepoSpec> &specs, const MinerConfig &cfg,
                                ChangeGraphStore &store);

} // namespace changeminer
