#include "changeminer/report.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace changeminer {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void write_file(const fs::path &path, const std::string &content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw StoreError("cannot write " + path.string());
  out << content;
}

json read_json(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw StoreError("missing " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception &e) {
    throw StoreError("malformed " + path.string() + ": " + e.what());
  }
}

std::string pattern_dir_name(size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "pattern-%04zu", index + 1);
  return buf;
}

std::string html_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
    case '&':
      out += "&amp;";
      break;
    case '<':
      out += "&lt;";
      break;
    case '>':
      out += "&gt;";
      break;
    case '"':
      out += "&quot;";
      break;
    default:
      out += c;
    }
  }
  return out;
}

std::string dot_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\')
      out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out;
}

std::string join(const std::vector<std::string> &v, std::string_view sep) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i)
      out += sep;
    out += v[i];
  }
  return out;
}

json meta_json(const PatternRecord &r) {
  return {{"canonical_key", r.canonical_key},
          {"support", r.support},
          {"size", r.size},
          {"sample_count", r.instances.size()},
          {"project_ids", r.project_ids},
          {"domain_tags", r.domain_tags},
          {"cross_project", r.cross_project()},
          {"category", to_string(r.category)},
          {"category_source", "heuristic origin classification"}};
}

json instances_json(const PatternRecord &r) {
  json arr = json::array();
  for (const auto &inst : r.instances)
    arr.push_back({{"change_graph_id", inst.change_graph_id}, {"repo_id", inst.repo_id}, {"binding", inst.binding}});
  return arr;
}

const char *dot_shape(NodeKind k) {
  switch (k) {
  case NodeKind::Data:
    return "ellipse";
  case NodeKind::Operation:
    return "box";
  case NodeKind::Control:
    return "diamond";
  }
  return "ellipse";
}

} // namespace

json to_json(const MiningConfig &cfg) {
  return {{"min_size", cfg.min_size},
          {"min_freq", cfg.min_freq},
          {"max_size", cfg.max_size},
          {"max_extensions_per_step", cfg.max_extensions_per_step},
          {"per_seed_time_budget", cfg.per_seed_time_budget},
          {"cross_project_only", cfg.cross_project_only},
          {"keep_subpatterns", cfg.keep_subpatterns}};
}

json pattern_graph_to_json(const PatternGraph &p) {
  json nodes = json::array();
  for (size_t i = 0; i < p.nodes.size(); ++i) {
    const PatternNode &n = p.nodes[i];
    nodes.push_back({{"id", i},
                     {"kind", to_string(n.kind)},
                     {"subkind", n.subkind},
                     {"label", n.label},
                     {"version", to_string(n.version)},
                     {"changed", n.changed}});
  }
  json edges = json::array();
  for (const auto &e : p.edges)
    edges.push_back(edge_to_json(e));
  json maps = json::array();
  for (auto [b, a] : p.map_edges)
    maps.push_back({b, a});
  return {{"nodes", nodes}, {"edges", edges}, {"map_edges", maps}};
}

PatternGraph pattern_graph_from_json(const json &j) {
  PatternGraph p;
  for (const auto &n : j.at("nodes"))
    p.nodes.push_back(PatternNode{version_from_string(n.at("version").get<std::string>()),
                                  node_kind_from_string(n.at("kind").get<std::string>()),
                                  n.at("subkind").get<std::string>(), n.at("label").get<std::string>(),
                                  n.value("changed", false)});
  for (const auto &e : j.at("edges"))
    p.edges.push_back(edge_from_json(e));
  for (const auto &m : j.at("map_edges"))
    p.map_edges.emplace_back(m.at(0).get<int>(), m.at(1).get<int>());
  const int n = p.size();
  auto bad = [n](int x) { return x < 0 || x >= n; };
  for (const auto &e : p.edges)
    if (bad(e.src) || bad(e.dst))
      throw StoreError("pattern edge endpoint out of range");
  for (auto [b, a] : p.map_edges)
    if (bad(b) || bad(a))
      throw StoreError("pattern map edge endpoint out of range");
  return p;
}

std::vector<PatternRecord> make_records(const PatternSet &ps, const StoreManifest &manifest) {
  std::map<std::string, const RepoSummary *> repos;
  for (const auto &r : manifest.repos)
    repos[r.repo_id] = &r;
  std::vector<PatternRecord> out;
  for (size_t i = 0; i < ps.patterns.size(); ++i) {
    const Pattern &p = ps.patterns[i];
    PatternRecord r;
    r.dir = pattern_dir_name(i);
    r.canonical_key = p.canonical_key;
    r.support = p.support;
    r.size = p.graph.size();
    r.project_ids = p.project_ids;
    r.graph = p.graph;
    r.instances = p.instances;
    std::set<std::string> tags, modules;
    for (const auto &id : p.project_ids)
      if (auto it = repos.find(id); it != repos.end()) {
        if (!it->second->domain_tag.empty())
          tags.insert(it->second->domain_tag);
        modules.insert(it->second->project_modules.begin(), it->second->project_modules.end());
      }
    r.domain_tags.assign(tags.begin(), tags.end());
    r.category = classify_pattern(p.graph, modules);
    out.push_back(std::move(r));
  }
  return out;
}

void write_patterns(const std::vector<PatternRecord> &records, const PatternSet &ps, const MiningConfig &cfg,
                    const fs::path &store_dir, const fs::path &out) {
  fs::create_directories(out);
  for (const auto &entry : fs::directory_iterator(out))
    if (entry.is_directory() && entry.path().filename().string().rfind("pattern-", 0) == 0)
      fs::remove_all(entry.path());

  json list = json::array();
  size_t samples = 0;
  for (const auto &r : records) {
    fs::path dir = out / r.dir;
    write_file(dir / "meta.json", dump_pretty(meta_json(r)));
    write_file(dir / "graph.json", dump_pretty(pattern_graph_to_json(r.graph)));
    write_file(dir / "instances.json", dump_pretty(instances_json(r)));
    samples += r.instances.size();
    json item = meta_json(r);
    item["dir"] = r.dir;
    list.push_back(item);
  }
  json budget = json::array();
  for (const auto &b : ps.budget_exceeded)
    budget.push_back(b.seed);
  json summary = {{"schema_version", kPatternSchemaVersion},
                  {"tool_version", kToolVersion},
                  {"store", store_dir.string()},
                  {"config", to_json(cfg)},
                  {"pattern_count", records.size()},
                  {"sample_count", samples},
                  {"budget_exceeded", budget},
                  {"patterns", list}};
  write_file(out / "summary.json", dump_pretty(summary));
}

PatternDir load_patterns(const fs::path &dir) {
  PatternDir out;
  out.summary = read_json(dir / "summary.json");
  if (out.summary.value("schema_version", 0) != kPatternSchemaVersion)
    throw StoreError("pattern directory schema version does not match");
  for (const auto &item : out.summary.at("patterns")) {
    PatternRecord r;
    r.dir = item.at("dir").get<std::string>();
    json meta = read_json(dir / r.dir / "meta.json");
    r.canonical_key = meta.at("canonical_key").get<std::string>();
    r.support = meta.at("support").get<int>();
    r.size = meta.at("size").get<int>();
    r.project_ids = meta.at("project_ids").get<std::vector<std::string>>();
    r.domain_tags = meta.value("domain_tags", std::vector<std::string>{});
    r.category = category_from_string(meta.at("category").get<std::string>());
    r.graph = pattern_graph_from_json(read_json(dir / r.dir / "graph.json"));
    for (const auto &inst : read_json(dir / r.dir / "instances.json"))
      r.instances.push_back(PatternInstance{inst.at("change_graph_id").get<std::string>(),
                                            inst.value("repo_id", std::string()),
                                            inst.at("binding").get<std::vector<int>>(), -1});
    out.records.push_back(std::move(r));
  }
  return out;
}

std::string export_dot(const PatternGraph &p, const std::string &title) {
  std::ostringstream out;
  out << "digraph \"" << dot_escape(title) << "\" {\n";
  out << "  rankdir=TB;\n  node [fontname=\"Helvetica\"];\n";
  for (Version v : {Version::Before, Version::After}) {
    out << "  subgraph cluster_" << to_string(v) << " {\n";
    out << "    label=\"" << to_string(v) << "\";\n";
    for (size_t i = 0; i < p.nodes.size(); ++i) {
      const PatternNode &n = p.nodes[i];
      if (n.version != v)
        continue;
      out << "    n" << i << " [label=\"" << dot_escape(n.label) << "\", shape=" << dot_shape(n.kind);
      if (n.changed)
        out << ", style=filled, fillcolor=\"#ffd9b3\"";
      out << "];\n";
    }
    out << "  }\n";
  }
  for (const auto &e : p.edges)
    out << "  n" << e.src << " -> n" << e.dst << " [label=\"" << dot_escape(e.label) << "\""
        << (e.kind == EdgeKind::Control ? ", color=\"#3366cc\"" : "") << "];\n";
  for (auto [b, a] : p.map_edges)
    out << "  n" << b << " -> n" << a << " [style=dashed, arrowhead=none, constraint=false];\n";
  out << "}\n";
  return out.str();
}

std::string export_text(const PatternGraph &p) { return dump_pretty(pattern_graph_to_json(p)); }

PatternGraph parse_text(const std::string &text) {
  try {
    return pattern_graph_from_json(json::parse(text));
  } catch (const json::exception &e) {
    throw StoreError(std::string("malformed pattern graph: ") + e.what());
  }
}

namespace {

const char *kStyle = R"(<style>
body { font-family: sans-serif; margin: 2em; }
table { border-collapse: collapse; }
td, th { border: 1px solid #ccc; padding: 4px 8px; text-align: left; }
.sample { border: 1px solid #ddd; margin: 1em 0; padding: 0.5em; }
.code { display: flex; gap: 1em; }
.code > div { flex: 1; min-width: 0; }
pre { background: #f7f7f7; padding: 0.5em; overflow-x: auto; }
.ln { color: #999; }
mark { background: #ffe08a; }
.missing { color: #a00; font-style: italic; }
</style>
)";

std::string render_source(const SourceSnippet &src, const std::set<int> &lines) {
  std::ostringstream out;
  out << "<pre>";
  std::istringstream in(src.text);
  std::string line;
  for (int no = src.start_line; std::getline(in, line); ++no) {
    out << "<span class=\"ln\">" << no << "</span> ";
    if (lines.count(no))
      out << "<mark>" << html_escape(line) << "</mark>";
    else
      out << html_escape(line);
    out << "\n";
  }
  out << "</pre>";
  return out.str();
}

std::string render_sample(const PatternRecord &r, const PatternInstance &inst, const ChangeGraph *g) {
  std::ostringstream out;
  out << "<div class=\"sample\">\n";
  if (!g) {
    out << "<p class=\"missing\">change graph " << html_escape(inst.change_graph_id)
        << " is not in the store</p>\n</div>\n";
    return out.str();
  }
  const Provenance &p = g->provenance;
  out << "<h3>" << html_escape(p.repo_id) << " &middot; " << html_escape(p.commit_hash.substr(0, 12)) << " &middot; "
      << html_escape(p.file_path) << " &middot; " << html_escape(p.function) << "</h3>\n";
  std::set<int> before_lines, after_lines;
  for (size_t t = 0; t < inst.binding.size() && t < r.graph.nodes.size(); ++t) {
    if (!r.graph.nodes[t].changed)
      continue;
    int id = inst.binding[t];
    if (id < 0 || id >= static_cast<int>(g->nodes.size()))
      continue;
    const FgNode &n = g->nodes[static_cast<size_t>(id)];
    if (n.span.start_line <= 0)
      continue;
    auto &lines = n.version == Version::Before ? before_lines : after_lines;
    for (int l = n.span.start_line; l <= std::max(n.span.start_line, n.span.end_line); ++l)
      lines.insert(l);
  }
  out << "<div class=\"code\">\n<div><h4>Before</h4>" << render_source(g->before_source, before_lines)
      << "</div>\n<div><h4>After</h4>" << render_source(g->after_source, after_lines) << "</div>\n</div>\n";
  out << "</div>\n";
  return out.str();
}

} // namespace

void render_html(const std::vector<PatternRecord> &records, const LoadedStore *store, const fs::path &out) {
  std::map<std::string, const ChangeGraph *> by_id;
  if (store)
    for (const auto &g : store->graphs)
      by_id[g.id] = &g;

  std::vector<const PatternRecord *> sorted;
  for (const auto &r : records)
    sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const PatternRecord *a, const PatternRecord *b) { return a->support > b->support; });

  auto build_page = [&](const PatternRecord *r) {
    std::ostringstream page;
    page << "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>" << r->dir << "</title>\n"
         << kStyle << "</head>\n<body>\n";
    page << "<p><a href=\"index.html\">index</a></p>\n";
    page << "<h1>" << r->dir << "</h1>\n<table>\n";
    page << "<tr><th>support</th><td>" << r->support << "</td></tr>\n";
    page << "<tr><th>size</th><td>" << r->size << "</td></tr>\n";
    page << "<tr><th>category</th><td>" << to_string(r->category) << " (heuristic)</td></tr>\n";
    page << "<tr><th>projects</th><td>" << html_escape(join(r->project_ids, ", ")) << "</td></tr>\n";
    page << "<tr><th>key</th><td><code>" << html_escape(r->canonical_key) << "</code></td></tr>\n";
    page << "</table>\n<h2>Graph</h2>\n<pre>" << html_escape(export_dot(r->graph, r->dir)) << "</pre>\n";
    page << "<h2>Samples (" << r->instances.size() << ")</h2>\n";
    for (const auto &inst : r->instances) {
      auto it = by_id.find(inst.change_graph_id);
      page << render_sample(*r, inst, it == by_id.end() ? nullptr : it->second);
    }
    page << "</body>\n</html>\n";
    return page.str();
  };

  // Pages are independent; build them in parallel and write in order.
  std::vector<std::string> pages(sorted.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i; (i = next++) < sorted.size();)
      pages[i] = build_page(sorted[i]);
  };
  size_t threads = std::min<size_t>(sorted.size(), std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (size_t t = 1; t < threads; ++t)
    pool.emplace_back(worker);
  worker();
  for (auto &t : pool)
    t.join();
  for (size_t i = 0; i < sorted.size(); ++i)
    write_file(out / (sorted[i]->dir + ".html"), pages[i]);

  std::ostringstream index;
  index << "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>Change patterns</title>\n" << kStyle
        << "</head>\n<body>\n<h1>Change patterns</h1>\n";
  size_t samples = 0;
  for (const auto &r : records)
    samples += r.instances.size();
  index << "<p>" << records.size() << " patterns, " << samples << " samples</p>\n";
  index << "<table>\n<tr><th>pattern</th><th>support</th><th>size</th><th>category</th><th>projects</th></tr>\n";
  for (const PatternRecord *r : sorted)
    index << "<tr><td><a href=\"" << r->dir << ".html\">" << r->dir << "</a></td><td>" << r->support << "</td><td>"
          << r->size << "</td><td>" << to_string(r->category) << "</td><td>" << html_escape(join(r->project_ids, ", "))
          << "</td></tr>\n";
  index << "</table>\n</body>\n</html>\n";
  write_file(out / "index.html", index.str());
}

std::string stats_report(const std::vector<PatternRecord> &records) {
  std::ostringstream out;
  size_t samples = 0;
  for (const auto &r : records)
    samples += r.instances.size();
  out << records.size() << " patterns, " << samples << " samples\n";

  auto table = [&](const std::string &title, const std::string &column, const std::map<std::string, int> &rows,
                   const std::vector<std::string> &order) {
    out << "\n" << title << "\n";
    char line[128];
    std::snprintf(line, sizeof line, "  %-16s %8s\n", column.c_str(), "patterns");
    out << line;
    for (const auto &key : order) {
      auto it = rows.find(key);
      std::snprintf(line, sizeof line, "  %-16s %8d\n", key.c_str(), it == rows.end() ? 0 : it->second);
      out << line;
    }
  };
  auto keys_by_number = [](const std::map<int, int> &m, std::map<std::string, int> &rows) {
    std::vector<std::string> order;
    for (auto [k, v] : m) {
      order.push_back(std::to_string(k));
      rows[order.back()] = v;
    }
    return order;
  };

  std::map<int, int> by_size, by_support;
  std::map<std::string, int> by_category, by_domain, by_cross;
  for (const auto &r : records) {
    ++by_size[r.size];
    ++by_support[r.support];
    ++by_category[std::string(to_string(r.category))];
    for (const auto &t : r.domain_tags)
      ++by_domain[t];
    ++by_cross[r.cross_project() ? "cross-project" : "single-project"];
  }
  std::map<std::string, int> rows;
  auto order = keys_by_number(by_size, rows);
  table("By size", "size", rows, order);
  rows.clear();
  order = keys_by_number(by_support, rows);
  table("By support", "support", rows, order);
  std::vector<std::string> categories;
  for (auto c : {StructuralCategory::BUILT, StructuralCategory::STAND, StructuralCategory::EXT,
                 StructuralCategory::ORIG, StructuralCategory::MOV, StructuralCategory::UNKNOWN})
    categories.emplace_back(to_string(c));
  table("By structural category (heuristic)", "category", by_category, categories);
  std::vector<std::string> domains;
  for (const auto &[k, v] : by_domain)
    domains.push_back(k);
  table("By domain", "domain", by_domain, domains);
  table("By cross-project status", "status", by_cross, {"cross-project", "single-project"});
  return out.str();
}

} // namespace changeminer
