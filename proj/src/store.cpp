#include "changeminer/store.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <tuple>

namespace changeminer {

using nlohmann::json;

json node_to_json(const FgNode &n) {
  json j = {{"id", n.id},
            {"kind", to_string(n.kind)},
            {"subkind", n.subkind},
            {"label", n.label},
            {"version", to_string(n.version)},
            {"span", {n.span.start_line, n.span.start_col, n.span.end_line, n.span.end_col}}};
  if (!n.concrete_name.empty())
    j["concrete_name"] = n.concrete_name;
  return j;
}

FgNode node_from_json(const json &j) {
  FgNode n;
  n.id = j.at("id").get<int>();
  n.kind = node_kind_from_string(j.at("kind").get<std::string>());
  n.subkind = j.at("subkind").get<std::string>();
  n.label = j.at("label").get<std::string>();
  n.version = version_from_string(j.value("version", std::string("None")));
  n.concrete_name = j.value("concrete_name", std::string());
  if (j.contains("span")) {
    const json &s = j.at("span");
    n.span = Span{s.at(0).get<int>(), s.at(1).get<int>(), s.at(2).get<int>(), s.at(3).get<int>()};
  }
  return n;
}

json edge_to_json(const FgEdge &e) {
  return {{"src", e.src}, {"dst", e.dst}, {"kind", to_string(e.kind)}, {"label", e.label}};
}

FgEdge edge_from_json(const json &j) {
  return FgEdge{j.at("src").get<int>(), j.at("dst").get<int>(),
                edge_kind_from_string(j.at("kind").get<std::string>()),
                j.at("label").get<std::string>()};
}

json to_json(const ChangeGraph &g) {
  const Provenance &p = g.provenance;
  json j;
  j["id"] = g.id;
  j["provenance"] = {{"repo_id", p.repo_id},
                     {"commit_hash", p.commit_hash},
                     {"parent_hash", p.parent_hash},
                     {"file_path", p.file_path},
                     {"function", p.function},
                     {"author_email_hash", p.author_email_hash},
                     {"commit_message", p.commit_message}};
  j["nodes"] = json::array();
  for (const auto &n : g.nodes)
    j["nodes"].push_back(node_to_json(n));
  j["edges"] = json::array();
  for (const auto &e : g.edges)
    j["edges"].push_back(edge_to_json(e));
  j["map_edges"] = json::array();
  for (auto [b, a] : g.map_edges)
    j["map_edges"].push_back({b, a});
  j["changed"] = g.changed;
  j["source"] = {{"before", {{"start_line", g.before_source.start_line}, {"text", g.before_source.text}}},
                 {"after", {{"start_line", g.after_source.start_line}, {"text", g.after_source.text}}}};
  return j;
}

ChangeGraph change_graph_from_json(const json &j) {
  ChangeGraph g;
  g.id = j.at("id").get<std::string>();
  const json &p = j.at("provenance");
  g.provenance = Provenance{p.value("repo_id", ""),     p.value("commit_hash", ""),
                            p.value("parent_hash", ""), p.value("file_path", ""),
                            p.value("function", ""),    p.value("author_email_hash", ""),
                            p.value("commit_message", "")};
  for (const auto &n : j.at("nodes"))
    g.nodes.push_back(node_from_json(n));
  for (const auto &e : j.at("edges"))
    g.edges.push_back(edge_from_json(e));
  for (const auto &m : j.at("map_edges"))
    g.map_edges.emplace_back(m.at(0).get<int>(), m.at(1).get<int>());
  g.changed = j.at("changed").get<std::vector<int>>();
  if (j.contains("source")) {
    const json &s = j.at("source");
    g.before_source = SourceSnippet{s.at("before").value("start_line", 0),
                                    s.at("before").value("text", std::string())};
    g.after_source = SourceSnippet{s.at("after").value("start_line", 0),
                                   s.at("after").value("text", std::string())};
  }
  const int n = static_cast<int>(g.nodes.size());
  for (int i = 0; i < n; ++i)
    if (g.nodes[static_cast<size_t>(i)].id != i)
      throw StoreError("record " + g.id + ": node ids are not dense");
  auto in_range = [n](int id) { return id >= 0 && id < n; };
  for (const auto &e : g.edges)
    if (!in_range(e.src) || !in_range(e.dst))
      throw StoreError("record " + g.id + ": edge endpoint out of range");
  for (auto [b, a] : g.map_edges)
    if (!in_range(b) || !in_range(a))
      throw StoreError("record " + g.id + ": map edge endpoint out of range");
  std::sort(g.changed.begin(), g.changed.end());
  return g;
}

std::string dump_line(const json &j) {
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string dump_pretty(const json &j) {
  return j.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

json to_json(const StoreManifest &m) {
  json repos = json::array();
  for (const auto &r : m.repos)
    repos.push_back({{"repo_id", r.repo_id},
                     {"url", r.url},
                     {"domain_tag", r.domain_tag},
                     {"graphs", r.graphs},
                     {"status", r.status},
                     {"warning", r.warning},
                     {"project_modules", r.project_modules}});
  return {{"schema_version", m.schema_version},
          {"tool_version", m.tool_version},
          {"config", m.config},
          {"record_count", m.record_count},
          {"repos", repos}};
}

StoreManifest manifest_from_json(const json &j) {
  StoreManifest m;
  m.schema_version = j.at("schema_version").get<int>();
  m.tool_version = j.value("tool_version", std::string());
  m.config = j.value("config", json::object());
  m.record_count = j.value("record_count", size_t{0});
  for (const auto &r : j.value("repos", json::array())) {
    RepoSummary s;
    s.repo_id = r.value("repo_id", "");
    s.url = r.value("url", "");
    s.domain_tag = r.value("domain_tag", "");
    s.graphs = r.value("graphs", size_t{0});
    s.status = r.value("status", "ok");
    s.warning = r.value("warning", "");
    s.project_modules = r.value("project_modules", std::vector<std::string>{});
    m.repos.push_back(std::move(s));
  }
  return m;
}

ChangeGraphStore::ChangeGraphStore(std::filesystem::path root) : root_(std::move(root)) {}

void ChangeGraphStore::append(ChangeGraph g) {
  std::lock_guard lock(mutex_);
  graphs_.push_back(std::move(g));
}

void ChangeGraphStore::add_repo(RepoSummary r) {
  std::lock_guard lock(mutex_);
  manifest_.repos.push_back(std::move(r));
}

void ChangeGraphStore::set_config(json config) {
  std::lock_guard lock(mutex_);
  manifest_.config = std::move(config);
}

size_t ChangeGraphStore::size() const {
  std::lock_guard lock(mutex_);
  return graphs_.size();
}

StoreManifest ChangeGraphStore::finalize() {
  std::lock_guard lock(mutex_);
  auto key = [](const ChangeGraph &g) {
    const Provenance &p = g.provenance;
    return std::tie(p.repo_id, p.commit_hash, p.file_path, p.function, g.id);
  };
  std::sort(graphs_.begin(), graphs_.end(),
            [&](const ChangeGraph &a, const ChangeGraph &b) { return key(a) < key(b); });
  std::sort(manifest_.repos.begin(), manifest_.repos.end(),
            [](const RepoSummary &a, const RepoSummary &b) { return a.repo_id < b.repo_id; });
  std::filesystem::create_directories(root_);
  {
    std::ofstream out(root_ / "graphs.jsonl", std::ios::binary | std::ios::trunc);
    if (!out)
      throw StoreError("cannot write " + (root_ / "graphs.jsonl").string());
    for (const auto &g : graphs_)
      out << dump_line(to_json(g)) << '\n';
  }
  manifest_.record_count = graphs_.size();
  std::ofstream out(root_ / "manifest.json", std::ios::binary | std::ios::trunc);
  if (!out)
    throw StoreError("cannot write " + (root_ / "manifest.json").string());
  out << dump_pretty(to_json(manifest_));
  return manifest_;
}

LoadedStore load_store(const std::filesystem::path &root) {
  LoadedStore store;
  std::ifstream mf(root / "manifest.json", std::ios::binary);
  if (!mf)
    throw StoreError("missing manifest.json in " + root.string());
  try {
    store.manifest = manifest_from_json(json::parse(mf));
  } catch (const json::exception &e) {
    throw StoreError(std::string("malformed manifest.json: ") + e.what());
  }
  if (store.manifest.schema_version != kStoreSchemaVersion)
    throw StoreError("store schema version " + std::to_string(store.manifest.schema_version) +
                     " does not match supported version " + std::to_string(kStoreSchemaVersion));
  std::ifstream gf(root / "graphs.jsonl", std::ios::binary);
  if (!gf)
    throw StoreError("missing graphs.jsonl in " + root.string());
  std::string line;
  size_t line_no = 0;
  while (std::getline(gf, line)) {
    ++line_no;
    if (line.empty())
      continue;
    try {
      store.graphs.push_back(change_graph_from_json(json::parse(line)));
    } catch (const json::exception &e) {
      throw StoreError("graphs.jsonl line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return store;
}

} // namespace changeminer
