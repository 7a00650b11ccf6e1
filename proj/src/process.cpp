#include "changeminer/process.hpp"

#include <cerrno>
#include <cstring>
#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <stdexcept>
#include <sys/wait.h>
#include <unistd.h>

extern char **environ;

namespace changeminer {
namespace {

struct Pipe {
  int fd[2] = {-1, -1};
  Pipe() {
    if (::pipe2(fd, O_CLOEXEC) != 0)
      throw std::runtime_error(std::string("pipe: ") + std::strerror(errno));
  }
  ~Pipe() {
    close_read();
    close_write();
  }
  void close_read() {
    if (fd[0] >= 0)
      ::close(fd[0]);
    fd[0] = -1;
  }
  void close_write() {
    if (fd[1] >= 0)
      ::close(fd[1]);
    fd[1] = -1;
  }
  int release_read() {
    int r = fd[0];
    fd[0] = -1;
    return r;
  }
  int release_write() {
    int w = fd[1];
    fd[1] = -1;
    return w;
  }
};

int spawn(const std::vector<std::string> &argv, const std::string &cwd,
          const std::vector<std::string> &extra_env, Pipe &in, Pipe &out, Pipe *err) {
  if (argv.empty())
    throw std::invalid_argument("empty argv");
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in.fd[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out.fd[1], STDOUT_FILENO);
  if (err)
    posix_spawn_file_actions_adddup2(&actions, err->fd[1], STDERR_FILENO);
  else
    posix_spawn_file_actions_addopen(&actions, STDERR_FILENO, "/dev/null", O_WRONLY, 0);
  if (!cwd.empty())
    posix_spawn_file_actions_addchdir_np(&actions, cwd.c_str());

  std::vector<char *> args;
  for (const auto &a : argv)
    args.push_back(const_cast<char *>(a.c_str()));
  args.push_back(nullptr);
  std::vector<std::string> env_storage;
  for (char **e = environ; *e; ++e)
    env_storage.emplace_back(*e);
  env_storage.insert(env_storage.end(), extra_env.begin(), extra_env.end());
  std::vector<char *> env;
  for (auto &e : env_storage)
    env.push_back(e.data());
  env.push_back(nullptr);

  pid_t pid = -1;
  int rc = posix_spawnp(&pid, args[0], &actions, nullptr, args.data(), env.data());
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0)
    throw std::runtime_error("cannot start " + argv[0] + ": " + std::strerror(rc));
  return pid;
}

int wait_for(int pid) {
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR)
      return -1;
  }
  if (WIFEXITED(status))
    return WEXITSTATUS(status);
  return 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
}

} // namespace

ProcessResult run_process(const std::vector<std::string> &argv, const std::string &cwd,
                          const std::string &input, const std::vector<std::string> &extra_env) {
  Pipe in, out, err;
  int pid = spawn(argv, cwd, extra_env, in, out, &err);
  in.close_read();
  out.close_write();
  err.close_write();

  ProcessResult result;
  size_t written = 0;
  if (input.empty())
    in.close_write();
  char buf[65536];
  while (out.fd[0] >= 0 || err.fd[0] >= 0) {
    pollfd fds[3];
    int n = 0;
    int out_idx = -1, err_idx = -1, in_idx = -1;
    if (out.fd[0] >= 0) {
      out_idx = n;
      fds[n++] = {out.fd[0], POLLIN, 0};
    }
    if (err.fd[0] >= 0) {
      err_idx = n;
      fds[n++] = {err.fd[0], POLLIN, 0};
    }
    if (in.fd[1] >= 0) {
      in_idx = n;
      fds[n++] = {in.fd[1], POLLOUT, 0};
    }
    if (::poll(fds, static_cast<nfds_t>(n), -1) < 0) {
      if (errno == EINTR)
        continue;
      break;
    }
    auto drain = [&](int idx, Pipe &p, std::string &dst) {
      if (idx < 0 || !(fds[idx].revents & (POLLIN | POLLHUP | POLLERR)))
        return;
      ssize_t r = ::read(p.fd[0], buf, sizeof buf);
      if (r > 0)
        dst.append(buf, static_cast<size_t>(r));
      else if (r == 0 || errno != EINTR)
        p.close_read();
    };
    drain(out_idx, out, result.out);
    drain(err_idx, err, result.err);
    if (in_idx >= 0 && (fds[in_idx].revents & (POLLOUT | POLLERR | POLLHUP))) {
      ssize_t w = ::write(in.fd[1], input.data() + written, input.size() - written);
      if (w > 0)
        written += static_cast<size_t>(w);
      if (w < 0 || written == input.size())
        in.close_write();
    }
  }
  in.close_write();
  result.exit_code = wait_for(pid);
  return result;
}

PipeProcess::PipeProcess(const std::vector<std::string> &argv, const std::string &cwd) {
  // A closed reader must not kill us with SIGPIPE.
  ::signal(SIGPIPE, SIG_IGN);
  Pipe in, out;
  pid_ = spawn(argv, cwd, {}, in, out, nullptr);
  in_fd_ = in.release_write();
  out_fd_ = out.release_read();
}

PipeProcess::~PipeProcess() {
  if (in_fd_ >= 0)
    ::close(in_fd_);
  if (out_fd_ >= 0)
    ::close(out_fd_);
  if (pid_ > 0)
    wait_for(pid_);
}

void PipeProcess::write(const std::string &data) {
  size_t done = 0;
  while (done < data.size()) {
    ssize_t w = ::write(in_fd_, data.data() + done, data.size() - done);
    if (w < 0) {
      if (errno == EINTR)
        continue;
      throw std::runtime_error(std::string("pipe write: ") + std::strerror(errno));
    }
    done += static_cast<size_t>(w);
  }
}

bool PipeProcess::fill() {
  if (pos_ > 0) {
    buffer_.erase(0, pos_);
    pos_ = 0;
  }
  char buf[65536];
  while (true) {
    ssize_t r = ::read(out_fd_, buf, sizeof buf);
    if (r > 0) {
      buffer_.append(buf, static_cast<size_t>(r));
      return true;
    }
    if (r < 0 && errno == EINTR)
      continue;
    return false;
  }
}

std::string PipeProcess::read_line() {
  while (true) {
    size_t nl = buffer_.find('\n', pos_);
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(pos_, nl - pos_);
      pos_ = nl + 1;
      return line;
    }
    if (!fill())
      throw std::runtime_error("unexpected end of child output");
  }
}

std::string PipeProcess::read_exact(size_t n) {
  while (buffer_.size() - pos_ < n)
    if (!fill())
      throw std::runtime_error("unexpected end of child output");
  std::string out = buffer_.substr(pos_, n);
  pos_ += n;
  return out;
}

} // namespace changeminer
