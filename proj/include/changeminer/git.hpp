#pragma once

#include "changeminer/process.hpp"

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace changeminer {

class RepoUnavailable : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct CommitInfo {
  std::string hash;
  std::vector<std::string> parents;
  std::string author_email;
  std::string message;
};

struct FileChange {
  char status = 'M'; // git name-status letter: A, M, D, T, ...
  std::string path;
};

/// Thin wrapper over the git command line for one local repository.
class GitRepository {
public:
  /// Throws RepoUnavailable when `path` is not a git work tree or bare repo.
  explicit GitRepository(std::string path);

  const std::string &path() const { return path_; }

  /// Commits reachable from HEAD, parents before children.
  std::vector<CommitInfo> commits() const;
  /// Files changed between `parent` and `commit`; renames appear as D + A.
  std::vector<FileChange> changed_files(const std::string &parent, const std::string &commit) const;
  /// Paths tracked at `rev`.
  std::vector<std::string> tracked_files(const std::string &rev = "HEAD") const;

  /// Clones `url` into `dest` (or fetches if it already exists) and opens it.
  static GitRepository clone_or_fetch(const std::string &url, const std::string &dest);

private:
  ProcessResult git(const std::vector<std::string> &args) const;
  std::string path_;
};

/// Reads file contents at revisions through one `git cat-file --batch` child.
/// Not thread-safe; use one reader per thread.
class BlobReader {
public:
  explicit BlobReader(const std::string &repo_path);
  std::optional<std::string> read(const std::string &rev, const std::string &path);

private:
  std::unique_ptr<PipeProcess> proc_;
};

} // namespace changeminer
