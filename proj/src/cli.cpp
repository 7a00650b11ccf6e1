#include "changeminer/cli.hpp"

#include "changeminer/history_miner.hpp"
#include "changeminer/pattern_miner.hpp"
#include "changeminer/report.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <fstream>
#include <sstream>

namespace changeminer {

namespace fs = std::filesystem;

namespace {

struct MineArgs {
  std::string repos;
  std::string out;
  MinerConfig cfg;
};

struct PatternArgs {
  std::string store;
  std::string out;
  MiningConfig cfg;
};

struct ReportArgs {
  std::string patterns;
  std::string format = "html";
  std::string out;
};

int cmd_mine(const MineArgs &a, std::ostream &out, std::ostream &err) {
  std::ifstream in(a.repos, std::ios::binary);
  if (!in) {
    err << "error: cannot read repos file " << a.repos << "\n";
    return 1;
  }
  std::stringstream text;
  text << in.rdbuf();
  std::vector<RepoSpec> specs;
  try {
    specs = parse_repos_file(text.str());
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  if (specs.empty()) {
    err << "error: repos file lists no repositories\n";
    return 1;
  }
  ChangeGraphStore store(a.out);
  StoreManifest m = mine_repositories(specs, a.cfg, store);
  for (const auto &r : m.repos) {
    out << r.repo_id << "\t" << r.graphs << " change graphs";
    if (r.status != "ok")
      out << "\t" << r.status;
    out << "\n";
    if (!r.warning.empty())
      err << "warning: " << r.repo_id << ": " << r.warning << "\n";
  }
  out << m.record_count << " change graphs total\n";
  return 0;
}

int cmd_patterns(const PatternArgs &a, std::ostream &out, std::ostream &err) {
  try {
    a.cfg.validate();
  } catch (const std::invalid_argument &e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  LoadedStore store;
  try {
    store = load_store(a.store);
  } catch (const StoreError &e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  PatternSet ps = mine(store.graphs, a.cfg);
  for (const auto &b : ps.budget_exceeded)
    err << "warning: time budget exceeded for seed " << b.seed << "\n";
  auto records = make_records(ps, store.manifest);
  write_patterns(records, ps, a.cfg, fs::absolute(a.store), a.out);
  out << ps.patterns.size() << " patterns, " << ps.sample_count() << " samples\n";
  return 0;
}

int cmd_report(const ReportArgs &a, std::ostream &out, std::ostream &err) {
  PatternDir dir;
  try {
    dir = load_patterns(a.patterns);
  } catch (const StoreError &e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  fs::create_directories(a.out);
  if (a.format == "html") {
    std::optional<LoadedStore> store;
    std::string store_path = dir.summary.value("store", std::string());
    if (!store_path.empty()) {
      try {
        store = load_store(store_path);
      } catch (const StoreError &e) {
        err << "warning: samples unavailable: " << e.what() << "\n";
      }
    }
    render_html(dir.records, store ? &*store : nullptr, a.out);
  } else {
    for (const auto &r : dir.records) {
      bool dot = a.format == "dot";
      std::ofstream f(fs::path(a.out) / (r.dir + (dot ? ".dot" : ".json")), std::ios::binary | std::ios::trunc);
      f << (dot ? export_dot(r.graph, r.dir) : export_text(r.graph));
    }
  }
  out << dir.records.size() << " patterns written to " << a.out << "\n";
  return 0;
}

int cmd_stats(const std::string &patterns, std::ostream &out, std::ostream &err) {
  try {
    out << stats_report(load_patterns(patterns).records);
  } catch (const StoreError &e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

} // namespace

int cli_main(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Mine recurring code change patterns from Python repository histories", "changeminer"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.set_config("--config", "", "INI-style key=value file; [mine] and [patterns] sections, flags win");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  MineArgs ma;
  auto *mine_cmd = app.add_subcommand("mine", "Extract change graphs into a store");
  mine_cmd->add_option("--repos", ma.repos, "File listing `id url_or_path [domain_tag]` per line")->required();
  mine_cmd->add_option("--out", ma.out, "Store directory")->required();
  mine_cmd->add_option("--jobs", ma.cfg.jobs, "Worker threads")->check(CLI::PositiveNumber);
  mine_cmd->add_option("--max-files-per-commit", ma.cfg.filter.max_files_per_commit,
                       "Skip commits touching more Python files")
      ->check(CLI::PositiveNumber);
  mine_cmd->add_flag("--skip-merges,!--no-skip-merges", ma.cfg.filter.skip_merges,
                     "Skip merge commits (default) or diff them against the first parent");
  mine_cmd->add_option("--path-glob", ma.cfg.filter.path_glob, "Files to consider");
  mine_cmd->add_option("--context-hops", ma.cfg.context_hops, "Unchanged context kept around changes")
      ->check(CLI::NonNegativeNumber);
  mine_cmd->add_option("--min-height", ma.cfg.mapper.min_height, "Smallest subtree matched top-down");
  mine_cmd->add_option("--dice-threshold", ma.cfg.mapper.dice_threshold, "Bottom-up container match threshold");
  mine_cmd->add_option("--cache-dir", ma.cfg.cache_dir, "Where remote repositories are cloned");

  PatternArgs pa;
  auto *pat_cmd = app.add_subcommand("patterns", "Mine frequent change patterns from a store");
  pat_cmd->add_option("--store", pa.store, "Store directory")->required();
  pat_cmd->add_option("--out", pa.out, "Pattern output directory")->required();
  pat_cmd->add_option("--min-size", pa.cfg.min_size, "Smallest pattern size in nodes");
  pat_cmd->add_option("--min-freq", pa.cfg.min_freq, "Minimum support");
  pat_cmd->add_option("--max-size", pa.cfg.max_size, "Largest pattern size in nodes");
  pat_cmd->add_option("--max-extensions-per-step", pa.cfg.max_extensions_per_step,
                      "Extensions explored per growth step");
  pat_cmd->add_option("--per-seed-time-budget", pa.cfg.per_seed_time_budget, "Seconds per seed group");
  pat_cmd->add_flag("--cross-project-only", pa.cfg.cross_project_only, "Keep patterns seen in two or more repos");
  pat_cmd->add_flag("--keep-subpatterns", pa.cfg.keep_subpatterns, "Disable maximality filtering");
  pat_cmd->add_option("--jobs", pa.cfg.jobs, "Worker threads")->check(CLI::PositiveNumber);

  ReportArgs ra;
  auto *rep_cmd = app.add_subcommand("report", "Export patterns as HTML, DOT or structured text");
  rep_cmd->add_option("--patterns", ra.patterns, "Pattern directory")->required();
  rep_cmd->add_option("--format", ra.format, "html, dot or text")->check(CLI::IsMember({"html", "dot", "text"}));
  rep_cmd->add_option("--out", ra.out, "Output directory")->required();

  std::string stats_dir;
  auto *stats_cmd = app.add_subcommand("stats", "Print pattern distribution tables");
  stats_cmd->add_option("--patterns", stats_dir, "Pattern directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*mine_cmd)
      return cmd_mine(ma, out, err);
    if (*pat_cmd)
      return cmd_patterns(pa, out, err);
    if (*rep_cmd)
      return cmd_report(ra, out, err);
    return cmd_stats(stats_dir, out, err);
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

} // namespace changeminer
