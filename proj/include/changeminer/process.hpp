#pragma once

#include <string>
#include <vector>

namespace changeminer {

struct ProcessResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

/// Runs `argv` (PATH lookup on argv[0]) in `cwd`, feeding `input` to stdin.
/// `extra_env` entries ("KEY=VALUE") are appended to the inherited environment.
/// Throws std::runtime_error if the process cannot be started.
ProcessResult run_process(const std::vector<std::string> &argv, const std::string &cwd = "",
                          const std::string &input = "",
                          const std::vector<std::string> &extra_env = {});

/// Long-running child with line-oriented stdin/stdout, e.g. `git cat-file --batch`.
class PipeProcess {
public:
  PipeProcess(const std::vector<std::string> &argv, const std::string &cwd);
  ~PipeProcess();
  PipeProcess(const PipeProcess &) = delete;
  PipeProcess &operator=(const PipeProcess &) = delete;

  void write(const std::string &data);
  /// Line without the trailing '\n'; throws on EOF.
  std::string read_line();
  std::string read_exact(size_t n);

private:
  bool fill();

  int pid_ = -1;
  int in_fd_ = -1;
  int out_fd_ = -1;
  std::string buffer_;
  size_t pos_ = 0;
};

} // namespace changeminer
