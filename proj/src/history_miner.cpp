#include "changeminer/history_miner.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace changeminer {
namespace {

SourceSnippet snippet(const std::string &text, const Span &span) {
  SourceSnippet s;
  s.start_line = span.start_line;
  std::istringstream in(text);
  std::string line;
  for (int no = 1; std::getline(in, line); ++no) {
    if (no < span.start_line)
      continue;
    if (no > span.end_line)
      break;
    s.text += line;
    s.text += '\n';
  }
  return s;
}

bool glob_impl(std::string_view p, std::string_view s) {
  while (!p.empty()) {
    if (p.substr(0, 3) == "**/") {
      // Zero or more whole directories.
      std::string_view rest = p.substr(3);
      if (glob_impl(rest, s))
        return true;
      for (size_t i = 0; i < s.size(); ++i)
        if (s[i] == '/' && glob_impl(rest, s.substr(i + 1)))
          return true;
      return false;
    }
    if (p.substr(0, 2) == "**") {
      std::string_view rest = p.substr(2);
      for (size_t i = 0; i <= s.size(); ++i)
        if (glob_impl(rest, s.substr(i)))
          return true;
      return false;
    }
    char c = p.front();
    if (c == '*') {
      std::string_view rest = p.substr(1);
      for (size_t i = 0; i <= s.size(); ++i) {
        if (glob_impl(rest, s.substr(i)))
          return true;
        if (i < s.size() && s[i] == '/')
          break;
      }
      return false;
    }
    if (s.empty())
      return false;
    if (c == '?') {
      if (s.front() == '/')
        return false;
    } else if (c != s.front()) {
      return false;
    }
    p.remove_prefix(1);
    s.remove_prefix(1);
  }
  return s.empty();
}

std::string repo_cache_path(const RepoSpec &spec, const MinerConfig &cfg, const ChangeGraphStore &store) {
  std::filesystem::path base = cfg.cache_dir.empty() ? store.root() / ".repos"
                                                      : std::filesystem::path(cfg.cache_dir);
  std::string safe = spec.repo_id;
  std::replace(safe.begin(), safe.end(), '/', '_');
  return (base / (safe + ".git")).string();
}

GitRepository open_repository(const RepoSpec &spec, const MinerConfig &cfg, const ChangeGraphStore &store) {
  if (std::filesystem::is_directory(spec.url))
    return GitRepository(spec.url);
  return GitRepository::clone_or_fetch(spec.url, repo_cache_path(spec, cfg, store));
}

} // namespace

nlohmann::json to_json(const MinerConfig &cfg) {
  return {{"skip_merges", cfg.filter.skip_merges},
          {"max_files_per_commit", cfg.filter.max_files_per_commit},
          {"path_glob", cfg.filter.path_glob},
          {"context_hops", cfg.context_hops},
          {"mapper",
           {{"min_height", cfg.mapper.min_height},
            {"dice_threshold", cfg.mapper.dice_threshold},
            {"max_subtree_compare", cfg.mapper.max_subtree_compare}}}};
}

std::vector<RepoSpec> parse_repos_file(std::string_view text) {
  std::vector<RepoSpec> out;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  for (int no = 1; std::getline(in, line); ++no) {
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::istringstream fields(line);
    std::vector<std::string> parts;
    for (std::string f; fields >> f;)
      parts.push_back(f);
    if (parts.empty())
      continue;
    if (parts.size() < 2 || parts.size() > 3)
      throw std::invalid_argument("repos file line " + std::to_string(no) +
                                  ": expected `repo_id url [domain_tag]`");
    if (!seen.insert(parts[0]).second)
      throw std::invalid_argument("repos file line " + std::to_string(no) + ": duplicate repo id " +
                                  parts[0]);
    out.push_back(RepoSpec{parts[0], parts[1], parts.size() == 3 ? parts[2] : ""});
  }
  return out;
}

bool glob_match(std::string_view pattern, std::string_view path) { return glob_impl(pattern, path); }

std::vector<FilePair> pair_modified_files(const GitRepository &repo, BlobReader &blobs,
                                          const CommitInfo &commit, const CommitFilter &filter) {
  if (commit.parents.empty())
    return {};
  if (commit.parents.size() > 1 && filter.skip_merges)
    return {};
  const std::string &parent = commit.parents.front();
  std::vector<FileChange> matching;
  for (auto &c : repo.changed_files(parent, commit.hash))
    if (glob_match(filter.path_glob, c.path))
      matching.push_back(std::move(c));
  if (static_cast<int>(matching.size()) > filter.max_files_per_commit)
    return {};
  std::vector<FilePair> out;
  for (const auto &c : matching) {
    if (c.status != 'M')
      continue;
    auto before = blobs.read(parent, c.path);
    auto after = blobs.read(commit.hash, c.path);
    if (!before || !after)
      continue;
    out.push_back(FilePair{c.path, std::move(*before), std::move(*after)});
  }
  return out;
}

std::vector<std::pair<const FunctionUnit *, const FunctionUnit *>>
match_functions(const std::vector<FunctionUnit> &before, const std::vector<FunctionUnit> &after) {
  std::map<std::string, const FunctionUnit *> by_name;
  for (const auto &u : after)
    by_name.emplace(u.qualified_name, &u);
  std::vector<std::pair<const FunctionUnit *, const FunctionUnit *>> out;
  for (const auto &u : before)
    if (auto it = by_name.find(u.qualified_name); it != by_name.end())
      out.emplace_back(&u, it->second);
  return out;
}

std::string record_id(const Provenance &prov) {
  return prov.repo_id + "/" + prov.commit_hash.substr(0, 12) + "/" + prov.file_path +
         "::" + prov.function;
}

std::vector<ChangeGraph> change_graphs_for_file(const FilePair &pair, const Provenance &base,
                                                const MinerConfig &cfg) {
  const std::string module_path = module_path_for_file(pair.path);
  const std::string before_text = decode_source(pair.before);
  const std::string after_text = decode_source(pair.after);
  NormalizedAst before_ast = parse_source(before_text);
  NormalizedAst after_ast = parse_source(after_text);

  auto before_units = extract_functions(before_ast, module_path);
  auto after_units = extract_functions(after_ast, module_path);
  ImportTable before_imports = build_import_table(before_ast, module_path);
  add_module_definitions(before_imports, before_ast, module_path);
  ImportTable after_imports = build_import_table(after_ast, module_path);
  add_module_definitions(after_imports, after_ast, module_path);

  std::vector<ChangeGraph> out;
  for (auto [b, a] : match_functions(before_units, after_units)) {
    if (b->body.same_shape(a->body))
      continue;
    Provenance prov = base;
    prov.file_path = pair.path;
    prov.function = b->qualified_name;
    if (!b->supported || !a->supported) {
      spdlog::warn("{}: skipping {} ({})", record_id(prov), prov.function,
                   b->supported ? a->unsupported_reason : b->unsupported_reason);
      continue;
    }
    try {
      Fgpdg fb = build_fgpdg(*b, before_imports);
      Fgpdg fa = build_fgpdg(*a, after_imports);
      TreeMapping tm = map_asts(b->body, a->body, cfg.mapper);
      NodeMapping nm = project_mapping(tm, fb, fa);
      auto g = build_change_graph(fb, fa, nm, prov, cfg.context_hops);
      if (!g)
        continue;
      g->id = record_id(prov);
      g->before_source = snippet(before_text, b->span);
      g->after_source = snippet(after_text, a->span);
      out.push_back(std::move(*g));
    } catch (const UnsupportedConstruct &e) {
      spdlog::warn("{}: skipping ({}, line {})", record_id(prov), e.what(), e.span().start_line);
    }
  }
  return out;
}

std::vector<std::string> project_modules(const GitRepository &repo) {
  std::set<std::string> roots;
  for (const auto &path : repo.tracked_files("HEAD")) {
    if (path.size() < 3 || path.compare(path.size() - 3, 3, ".py") != 0)
      continue;
    std::string dotted = module_path_for_file(path);
    auto first = dotted.substr(0, dotted.find('.'));
    if (first.empty())
      continue;
    roots.insert(first);
    // src-layout packages expose the component below "src".
    if (first == "src" && dotted.size() > 4) {
      auto rest = dotted.substr(4);
      roots.insert(rest.substr(0, rest.find('.')));
    }
  }
  return {roots.begin(), roots.end()};
}

RepoSummary mine_repository(const RepoSpec &spec, const MinerConfig &cfg, ChangeGraphStore &store) {
  GitRepository repo = open_repository(spec, cfg, store);
  RepoSummary summary;
  summary.repo_id = spec.repo_id;
  summary.url = spec.url;
  summary.domain_tag = spec.domain_tag;
  summary.project_modules = project_modules(repo);

  const std::vector<CommitInfo> commits = repo.commits();
  std::atomic<size_t> next{0};
  std::atomic<size_t> produced{0};
  auto worker = [&] {
    BlobReader blobs(repo.path());
    for (size_t i = next++; i < commits.size(); i = next++) {
      const CommitInfo &c = commits[i];
      std::vector<FilePair> files;
      try {
        files = pair_modified_files(repo, blobs, c, cfg.filter);
      } catch (const std::exception &e) {
        spdlog::warn("{}: commit {}: {}", spec.repo_id, c.hash.substr(0, 12), e.what());
        continue;
      }
      if (files.empty())
        continue;
      Provenance base{spec.repo_id, c.hash, c.parents.front(), "", "",
                      hash_author_email(c.author_email), c.message};
      for (const auto &f : files) {
        try {
          for (auto &g : change_graphs_for_file(f, base, cfg)) {
            store.append(std::move(g));
            ++produced;
          }
        } catch (const SyntaxError &e) {
          spdlog::warn("{}: commit {}: {}: {}", spec.repo_id, c.hash.substr(0, 12), f.path, e.what());
        } catch (const std::exception &e) {
          spdlog::warn("{}: commit {}: {}: {}", spec.repo_id, c.hash.substr(0, 12), f.path, e.what());
        }
      }
    }
  };
  int jobs = std::max(1, cfg.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < jobs; ++t)
      threads.emplace_back(worker);
    for (auto &t : threads)
      t.join();
  }
  summary.graphs = produced;
  spdlog::info("{}: {} commits, {} change graphs", spec.repo_id, commits.size(), summary.graphs);
  return summary;
}

StoreManifest mine_repositories(const std::vector<RepoSpec> &specs, const MinerConfig &cfg,
                                ChangeGraphStore &store) {
  store.set_config(to_json(cfg));
  for (const auto &spec : specs) {
    try {
      store.add_repo(mine_repository(spec, cfg, store));
    } catch (const RepoUnavailable &e) {
      spdlog::warn("{}: repository unavailable: {}", spec.repo_id, e.what());
      RepoSummary failed;
      failed.repo_id = spec.repo_id;
      failed.url = spec.url;
      failed.domain_tag = spec.domain_tag;
      failed.status = "failed";
      failed.warning = e.what();
      store.add_repo(std::move(failed));
    }
  }
  return store.finalize();
}

} // namespace changeminer
