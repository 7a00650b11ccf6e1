#include "changeminer/git.hpp"

#include <filesystem>
#include <sstream>

namespace changeminer {
namespace {

const std::vector<std::string> kGitEnv = {"GIT_TERMINAL_PROMPT=0", "LC_ALL=C"};

std::vector<std::string> split(const std::string &s, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (start <= s.size()) {
    size_t end = s.find(sep, start);
    if (end == std::string::npos)
      end = s.size();
    out.push_back(s.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

std::string trim(const std::string &s) {
  size_t b = s.find_first_not_of(" \n\r\t");
  size_t e = s.find_last_not_of(" \n\r\t");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

} // namespace

GitRepository::GitRepository(std::string path) : path_(std::move(path)) {
  if (!std::filesystem::is_directory(path_))
    throw RepoUnavailable("not a directory: " + path_);
  ProcessResult r = git({"rev-parse", "--git-dir"});
  if (r.exit_code != 0)
    throw RepoUnavailable("not a git repository: " + path_);
}

ProcessResult GitRepository::git(const std::vector<std::string> &args) const {
  std::vector<std::string> argv = {"git", "-c", "core.quotepath=off"};
  argv.insert(argv.end(), args.begin(), args.end());
  return run_process(argv, path_, "", kGitEnv);
}

std::vector<CommitInfo> GitRepository::commits() const {
  ProcessResult r = git({"log", "--topo-order", "--reverse", "--format=%H%x1f%P%x1f%ae%x1f%B%x1e"});
  if (r.exit_code != 0) {
    // An empty repository has no HEAD.
    if (git({"rev-parse", "--verify", "-q", "HEAD"}).exit_code != 0)
      return {};
    throw RepoUnavailable("git log failed in " + path_ + ": " + trim(r.err));
  }
  std::vector<CommitInfo> out;
  for (const std::string &rec : split(r.out, '\x1e')) {
    std::string record = rec;
    record.erase(0, record.find_first_not_of('\n'));
    if (record.empty())
      continue;
    auto fields = split(record, '\x1f');
    if (fields.size() < 4)
      continue;
    CommitInfo c;
    c.hash = fields[0];
    std::istringstream parents(fields[1]);
    for (std::string p; parents >> p;)
      c.parents.push_back(p);
    c.author_email = fields[2];
    c.message = trim(fields[3]);
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<FileChange> GitRepository::changed_files(const std::string &parent,
                                                     const std::string &commit) const {
  ProcessResult r = git({"diff-tree", "-r", "--no-renames", "--name-status", "-z", parent, commit});
  if (r.exit_code != 0)
    throw RepoUnavailable("git diff-tree failed: " + trim(r.err));
  std::vector<FileChange> out;
  auto parts = split(r.out, '\0');
  for (size_t i = 0; i + 1 < parts.size(); i += 2) {
    if (parts[i].empty())
      break;
    out.push_back(FileChange{parts[i][0], parts[i + 1]});
  }
  return out;
}

std::vector<std::string> GitRepository::tracked_files(const std::string &rev) const {
  ProcessResult r = git({"ls-tree", "-r", "-z", "--name-only", rev});
  if (r.exit_code != 0)
    return {};
  std::vector<std::string> out;
  for (auto &p : split(r.out, '\0'))
    if (!p.empty())
      out.push_back(std::move(p));
  return out;
}

GitRepository GitRepository::clone_or_fetch(const std::string &url, const std::string &dest) {
  namespace fs = std::filesystem;
  if (fs::exists(fs::path(dest) / "HEAD") || fs::exists(fs::path(dest) / ".git")) {
    run_process({"git", "fetch", "--quiet", "origin", "+refs/heads/*:refs/heads/*"}, dest, "", kGitEnv);
    return GitRepository(dest);
  }
  fs::create_directories(fs::path(dest).parent_path());
  ProcessResult r =
      run_process({"git", "clone", "--quiet", "--bare", url, dest}, "", "", kGitEnv);
  if (r.exit_code != 0)
    throw RepoUnavailable("cannot clone " + url + ": " + trim(r.err));
  return GitRepository(dest);
}

BlobReader::BlobReader(const std::string &repo_path)
    : proc_(std::make_unique<PipeProcess>(std::vector<std::string>{"git", "cat-file", "--batch"},
                                          repo_path)) {}

std::optional<std::string> BlobReader::read(const std::string &rev, const std::string &path) {
  proc_->write(rev + ":" + path + "\n");
  std::string header = proc_->read_line();
  // "<sha> <type> <size>" or "<object> missing"
  auto fields = split(header, ' ');
  if (fields.size() != 3 || fields[2].find_first_not_of("0123456789") != std::string::npos)
    return std::nullopt;
  size_t size = std::stoul(fields[2]);
  std::string content = proc_->read_exact(size);
  proc_->read_exact(1); // trailing newline
  if (fields[1] != "blob")
    return std::nullopt;
  return content;
}

} // namespace changeminer
