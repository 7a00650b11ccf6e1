#include "changeminer/history_miner.hpp"
#include "changeminer/store.hpp"

#include "../support/git_fixture.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace changeminer;
using testsupport::GitFixture;
using testsupport::TempDir;

namespace {

std::string read_file(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const char *kCopyBefore = "def clone(x):\n    y = x.copy()\n    return y\n";
const char *kCopyAfter = "import copy\n\ndef clone(x):\n    y = copy.deepcopy(x)\n    return y\n";

StoreManifest mine_one(const std::filesystem::path &repo, const std::filesystem::path &out,
                       MinerConfig cfg = {}) {
  ChangeGraphStore store(out);
  return mine_repositories({RepoSpec{"r", repo.string(), "test"}}, cfg, store);
}

} // namespace

TEST_CASE("glob_match handles double star, star and question mark") {
  CHECK(glob_match("**/*.py", "a.py"));
  CHECK(glob_match("**/*.py", "pkg/sub/a.py"));
  CHECK_FALSE(glob_match("**/*.py", "a.pyc"));
  CHECK_FALSE(glob_match("**/*.py", "docs/a.txt"));
  CHECK(glob_match("src/*.py", "src/a.py"));
  CHECK_FALSE(glob_match("src/*.py", "src/x/a.py"));
  CHECK(glob_match("?.py", "a.py"));
  CHECK_FALSE(glob_match("?.py", "ab.py"));
  CHECK(glob_match("pkg/**", "pkg/x/y.py"));
}

TEST_CASE("parse_repos_file reads ids, urls and tags") {
  auto specs = parse_repos_file("# corpus\nalpha https://example.com/a.git web\n\nbeta /tmp/b  # local\n");
  REQUIRE(specs.size() == 2);
  CHECK(specs[0].repo_id == "alpha");
  CHECK(specs[0].url == "https://example.com/a.git");
  CHECK(specs[0].domain_tag == "web");
  CHECK(specs[1].repo_id == "beta");
  CHECK(specs[1].domain_tag.empty());
  CHECK_THROWS_AS(parse_repos_file("lonely\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_repos_file("a x\na y\n"), std::invalid_argument);
}

TEST_CASE("a repository with only an initial commit yields no graphs") {
  TempDir tmp;
  GitFixture repo(tmp.path() / "repo");
  repo.write("m.py", kCopyBefore);
  repo.commit("init");
  auto manifest = mine_one(repo.path(), tmp.path() / "out");
  CHECK(manifest.record_count == 0);
  REQUIRE(manifest.repos.size() == 1);
  CHECK(manifest.repos[0].status == "ok");
}

TEST_CASE("copy to deepcopy produces one change graph with provenance") {
  TempDir tmp;
  GitFixture repo(tmp.path() / "repo", "alice@example.com");
  repo.write("pkg/m.py", kCopyBefore);
  std::string parent = repo.commit("init");
  repo.write("pkg/m.py", kCopyAfter);
  std::string head = repo.commit("use deepcopy");

  auto manifest = mine_one(repo.path(), tmp.path() / "out");
  REQUIRE(manifest.record_count == 1);
  auto loaded = load_store(tmp.path() / "out");
  REQUIRE(loaded.graphs.size() == 1);
  const ChangeGraph &g = loaded.graphs[0];
  CHECK(g.provenance.repo_id == "r");
  CHECK(g.provenance.commit_hash == head);
  CHECK(g.provenance.parent_hash == parent);
  CHECK(g.provenance.file_path == "pkg/m.py");
  CHECK(g.provenance.function == "pkg.m.clone");
  CHECK(g.provenance.commit_message == "use deepcopy");
  CHECK(g.provenance.author_email_hash == hash_author_email("alice@example.com"));
  CHECK(g.id == "r/" + head.substr(0, 12) + "/pkg/m.py::pkg.m.clone");
  CHECK(g.before_source.text == kCopyBefore);
  CHECK(g.after_source.start_line == 3);

  bool saw_old = false, saw_new = false;
  for (int id : g.changed) {
    const FgNode &n = g.nodes[static_cast<size_t>(id)];
    saw_old |= n.version == Version::Before && n.label == "?.copy";
    saw_new |= n.version == Version::After && n.label == "copy.deepcopy";
  }
  CHECK(saw_old);
  CHECK(saw_new);
  CHECK(loaded.manifest.repos[0].project_modules == std::vector<std::string>{"pkg"});
}

TEST_CASE("comment and whitespace edits produce no graphs") {
  TempDir tmp;
  GitFixture repo(tmp.path() / "repo");
  repo.write("m.py", kCopyBefore);
  repo.commit("init");
  repo.write("m.py", "# note\ndef clone(x):\n\n    y = x.copy()   # shallow\n    return y\n");
  repo.commit("comment");
  CHECK(mine_one(repo.path(), tmp.path() / "out").record_count == 0);
}

TEST_CASE("added files and non-Python files are ignored") {
  TempDir tmp;
  GitFixture repo(tmp.path() / "repo");
  repo.write("a.py", kCopyBefore);
  repo.write("b.txt", "one\n");
  repo.commit("init");
  repo.write("a.py", kCopyAfter);
  repo.write("b.txt", "two\n");
  repo.write("new.py", kCopyAfter);
  repo.commit("mixed");

  GitRepository git(repo.path().string());
  BlobReader blobs(repo.path().string());
  auto commits = git.commits();
  REQUIRE(commits.size() == 2);
  auto pairs = pair_modified_files(git, blobs, commits[1], CommitFilter{});
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].path == "a.py");
  CHECK(pairs[0].before == kCopyBefore);
  CHECK(pairs[0].after == kCopyAfter);
  CHECK(pair_modified_files(git, blobs, commits[0], CommitFilter{}).empty());
}

TEST_CASE("commits touching more than the file cap are skipped") {
  TempDir tmp;
  GitFixture repo(tmp.path() / "repo");
  for (int i = 0; i < 51; ++i)
    repo.write("f" + std::to_string(i) + ".py", kCopyBefore);
  repo.commit("init");
  for (int i = 0; i < 51; ++i)
    repo.write("f" + std::to_string(i) + ".py", kCopyAfter);
  repo.commit("bulk");

  GitRepository git(repo.path().string());
  BlobReader blobs(repo.path().string());
  auto head = git.commits().back();
  CHECK(pair_modified_files(git, blobs, head, CommitFilter{}).empty());
  CommitFilter wide;
  wide.max_files_per_commit = 51;
  CHECK(pair_modified_files(git, blobs, head, wide).size() == 51);
}

TEST_CASE("merge commits are skipped unless requested") {
  TempDir tmp;
  GitFixture repo(tmp.path() / "repo");
  repo.write("m.py", kCopyBefore);
  repo.commit("init");
  repo.git({"checkout", "-q", "-b", "side"});
  repo.write("other.py", "def f():\n    return 1\n");
  repo.commit("side");
  repo.git({"checkout", "-q", "main"});
  repo.write("m.py", kCopyAfter);
  repo.commit("main change");
  repo.git({"merge", "-q", "--no-ff", "--no-edit", "side"});

  GitRepository git(repo.path().string());
  BlobReader blobs(repo.path().string());
  auto commits = git.commits();
  const CommitInfo *merge = nullptr;
  for (const auto &c : commits)
    if (c.parents.size() == 2)
      merge = &c;
  REQUIRE(merge != nullptr);
  CHECK(pair_modified_files(git, blobs, *merge, CommitFilter{}).empty());
  CommitFilter keep;
  keep.skip_merges = false;
  // Against the first parent (main), the merge brings in other.py as an addition only.
  CHECK(pair_modified_files(git, blobs, *merge, keep).empty());

  CHECK(mine_one(repo.path(), tmp.path() / "out").record_count == 1);
}

TEST_CASE("syntax errors skip the file and keep mining") {
  TempDir tmp;
  GitFixture repo(tmp.path() / "repo");
  repo.write("m.py", kCopyBefore);
  repo.write("bad.py", "def f():\n    return 1\n");
  repo.commit("init");
  repo.write("m.py", kCopyAfter);
  repo.write("bad.py", "def f(:\n    return 2\n");
  repo.commit("break");
  CHECK(mine_one(repo.path(), tmp.path() / "out").record_count == 1);
}

TEST_CASE("an unavailable repository is recorded as failed") {
  TempDir tmp;
  ChangeGraphStore store(tmp.path() / "out");
  MinerConfig cfg;
  auto manifest = mine_repositories(
      {RepoSpec{"gone", (tmp.path() / "missing.git").string(), ""}}, cfg, store);
  REQUIRE(manifest.repos.size() == 1);
  CHECK(manifest.repos[0].status == "failed");
  CHECK_FALSE(manifest.repos[0].warning.empty());
  CHECK(manifest.record_count == 0);
}

TEST_CASE("store round trip and schema check") {
  TempDir tmp;
  GitFixture repo(tmp.path() / "repo");
  repo.write("m.py", kCopyBefore);
  repo.commit("init");
  repo.write("m.py", kCopyAfter);
  repo.commit("change");
  mine_one(repo.path(), tmp.path() / "out");
  auto loaded = load_store(tmp.path() / "out");
  REQUIRE(loaded.graphs.size() == 1);
  auto again = change_graph_from_json(to_json(loaded.graphs[0]));
  CHECK(again == loaded.graphs[0]);

  auto manifest = nlohmann::json::parse(read_file(tmp.path() / "out" / "manifest.json"));
  manifest["schema_version"] = 99;
  std::ofstream(tmp.path() / "out" / "manifest.json") << manifest.dump();
  CHECK_THROWS_AS(load_store(tmp.path() / "out"), StoreError);
}

TEST_CASE("store bytes do not depend on the number of jobs") {
  TempDir tmp;
  GitFixture repo(tmp.path() / "repo");
  repo.write("a.py", kCopyBefore);
  repo.write("b.py", "def g(s):\n    s.add(1)\n    return s\n");
  repo.commit("init");
  for (int i = 0; i < 6; ++i) {
    repo.write("a.py", i % 2 ? kCopyBefore : kCopyAfter);
    repo.write("b.py", i % 2 ? "def g(s):\n    s.add(1)\n    return s\n"
                             : "def g(s):\n    s.update([1])\n    return s\n");
    repo.commit("step " + std::to_string(i));
  }
  MinerConfig one, eight;
  eight.jobs = 8;
  mine_one(repo.path(), tmp.path() / "o1", one);
  mine_one(repo.path(), tmp.path() / "o8", eight);
  CHECK(read_file(tmp.path() / "o1" / "graphs.jsonl") == read_file(tmp.path() / "o8" / "graphs.jsonl"));
  CHECK(read_file(tmp.path() / "o1" / "manifest.json") == read_file(tmp.path() / "o8" / "manifest.json"));
  CHECK(load_store(tmp.path() / "o1").graphs.size() == 12);
}
