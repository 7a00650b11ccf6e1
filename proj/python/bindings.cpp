// JSON-valued bindings; the Python package decodes the strings.

#include "changeminer/cli.hpp"
#include "changeminer/history_miner.hpp"
#include "changeminer/origin_classifier.hpp"
#include "changeminer/pattern_miner.hpp"
#include "changeminer/report.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace changeminer;

namespace {

std::string change_graphs_json(const std::string &before, const std::string &after, const std::string &path,
                               const std::string &repo_id, int context_hops) {
  Provenance prov;
  prov.repo_id = repo_id;
  prov.commit_hash = std::string(40, '0');
  prov.file_path = path;
  MinerConfig cfg;
  cfg.context_hops = context_hops;
  nlohmann::json out = nlohmann::json::array();
  for (const auto &g : change_graphs_for_file({path, before, after}, prov, cfg))
    out.push_back(to_json(g));
  return dump_line(out);
}

std::string mine_store(const std::vector<std::tuple<std::string, std::string, std::string>> &repos,
                       const std::string &out, int jobs, int max_files_per_commit, bool skip_merges) {
  std::vector<RepoSpec> specs;
  for (const auto &[id, url, tag] : repos)
    specs.push_back(RepoSpec{id, url, tag});
  MinerConfig cfg;
  cfg.jobs = jobs;
  cfg.filter.max_files_per_commit = max_files_per_commit;
  cfg.filter.skip_merges = skip_merges;
  StoreManifest m;
  {
    py::gil_scoped_release release;
    ChangeGraphStore store(out);
    m = mine_repositories(specs, cfg, store);
  }
  return dump_line(to_json(m));
}

std::string mine_patterns(const std::string &store_dir, const std::string &out, int min_size, int min_freq,
                          int max_size, bool cross_project_only, bool keep_subpatterns, int jobs) {
  MiningConfig cfg;
  cfg.min_size = min_size;
  cfg.min_freq = min_freq;
  cfg.max_size = max_size;
  cfg.cross_project_only = cross_project_only;
  cfg.keep_subpatterns = keep_subpatterns;
  cfg.jobs = jobs;
  cfg.validate();
  py::gil_scoped_release release;
  LoadedStore store = load_store(store_dir);
  PatternSet ps = mine(store.graphs, cfg);
  write_patterns(make_records(ps, store.manifest), ps, cfg, std::filesystem::absolute(store_dir), out);
  return dump_line(load_patterns(out).summary);
}

py::tuple run_cli(const std::vector<std::string> &args) {
  std::vector<std::string> full{"changeminer"};
  full.insert(full.end(), args.begin(), args.end());
  std::vector<const char *> argv;
  for (const auto &a : full)
    argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code;
  {
    py::gil_scoped_release release;
    code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

PatternGraph pattern_from(const std::string &text) { return parse_text(text); }

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of changeminer";
  m.attr("__version__") = std::string(kToolVersion);

  py::register_exception<SyntaxError>(m, "PythonSyntaxError", PyExc_ValueError);
  py::register_exception<StoreError>(m, "StoreError", PyExc_RuntimeError);

  m.def("change_graphs", &change_graphs_json, py::arg("before"), py::arg("after"), py::arg("path") = "module.py",
        py::arg("repo_id") = "", py::arg("context_hops") = 1,
        "Change graphs (JSON) for every modified function between two versions of a file.");
  m.def("parse_repos_file", [](const std::string &text) {
    std::vector<std::tuple<std::string, std::string, std::string>> out;
    for (const auto &r : parse_repos_file(text))
      out.emplace_back(r.repo_id, r.url, r.domain_tag);
    return out;
  });
  m.def("mine_store", &mine_store, py::arg("repos"), py::arg("out"), py::arg("jobs") = 1,
        py::arg("max_files_per_commit") = 50, py::arg("skip_merges") = true);
  m.def("load_store", [](const std::string &dir) {
    LoadedStore s = load_store(dir);
    nlohmann::json graphs = nlohmann::json::array();
    for (const auto &g : s.graphs)
      graphs.push_back(to_json(g));
    return dump_line({{"manifest", to_json(s.manifest)}, {"graphs", graphs}});
  });
  m.def("mine_patterns", &mine_patterns, py::arg("store"), py::arg("out"), py::arg("min_size") = 4,
        py::arg("min_freq") = 3, py::arg("max_size") = 20, py::arg("cross_project_only") = false,
        py::arg("keep_subpatterns") = false, py::arg("jobs") = 1);
  m.def("canonical_key", [](const std::string &text) { return canonical_key(pattern_from(text)); });
  m.def("isomorphic",
        [](const std::string &a, const std::string &b) { return isomorphic(pattern_from(a), pattern_from(b)); });
  m.def("export_dot", [](const std::string &text, const std::string &title) { return export_dot(pattern_from(text), title); },
        py::arg("pattern"), py::arg("title") = "pattern");
  m.def("call_origin", [](const std::string &callee, const std::set<std::string> &modules) {
    return std::string(to_string(call_origin(callee, modules)));
  });
  m.def("structural_category",
        [](const std::vector<std::string> &before, const std::vector<std::string> &after,
           const std::set<std::string> &modules) {
          std::vector<CallOrigin> b, a;
          for (const auto &c : before)
            b.push_back(describe_call(c, modules));
          for (const auto &c : after)
            a.push_back(describe_call(c, modules));
          return std::string(to_string(structural_category(b, a)));
        });
  m.def("stats", [](const std::string &dir) { return stats_report(load_patterns(dir).records); });
  m.def("run_cli", &run_cli, py::arg("args"), "Runs the command-line tool in process; returns (code, out, err).");
}
