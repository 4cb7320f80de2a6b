#include "transjudge/process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <mutex>

#include "transjudge/error.hpp"

namespace transjudge {

namespace {

using Clock = std::chrono::steady_clock;

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  Fd(Fd&& o) noexcept : fd_(o.release()) {}
  Fd& operator=(Fd&& o) noexcept {
    reset(o.release());
    return *this;
  }
  ~Fd() { reset(); }

  int get() const { return fd_; }
  explicit operator bool() const { return fd_ >= 0; }
  int release() {
    int f = fd_;
    fd_ = -1;
    return f;
  }
  void reset(int fd = -1) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = fd;
  }

 private:
  int fd_ = -1;
};

struct Pipe {
  Fd read;
  Fd write;
};

Pipe make_pipe() {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) {
    fail(ErrorCode::SandboxFailure, std::string("pipe: ") + std::strerror(errno));
  }
  return {Fd(fds[0]), Fd(fds[1])};
}

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK); }

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

// Returns false at EOF or on a hard error.
bool drain(Fd& fd, std::string& sink, std::size_t cap, bool& truncated) {
  std::array<char, 65536> buf;
  for (;;) {
    const ssize_t n = ::read(fd.get(), buf.data(), buf.size());
    if (n > 0) {
      const std::size_t room = cap > sink.size() ? cap - sink.size() : 0;
      const std::size_t take = std::min(room, static_cast<std::size_t>(n));
      sink.append(buf.data(), take);
      if (take < static_cast<std::size_t>(n)) truncated = true;
      continue;
    }
    if (n == 0) {
      fd.reset();
      return false;
    }
    if (errno == EINTR) continue;
    if (errno == EAGAIN || errno == EWOULDBLOCK) return true;
    fd.reset();
    return false;
  }
}

}  // namespace

bool executable_available(const std::string& program) {
  if (program.empty()) return false;
  if (program.find('/') != std::string::npos) return ::access(program.c_str(), X_OK) == 0;
  const char* path = std::getenv("PATH");
  if (!path) return false;
  std::string_view rest(path);
  while (true) {
    const auto colon = rest.find(':');
    std::string dir(rest.substr(0, colon));
    if (dir.empty()) dir = ".";
    if (::access((dir + "/" + program).c_str(), X_OK) == 0) return true;
    if (colon == std::string_view::npos) break;
    rest.remove_prefix(colon + 1);
  }
  return false;
}

ProcessResult run_process(const ProcessSpec& spec) {
  if (spec.argv.empty()) fail(ErrorCode::SandboxFailure, "empty argv");
  ignore_sigpipe();

  Pipe in = make_pipe();
  Pipe out = make_pipe();
  Pipe err = make_pipe();
  Pipe status = make_pipe();

  std::vector<char*> argv;
  argv.reserve(spec.argv.size() + 1);
  for (const auto& a : spec.argv) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);
  const std::string cwd = spec.cwd.string();
  const int max_procs = spec.max_processes;

  const auto started = Clock::now();
  const pid_t pid = ::fork();
  if (pid < 0) fail(ErrorCode::SandboxFailure, std::string("fork: ") + std::strerror(errno));

  if (pid == 0) {
    // Child: only async-signal-safe calls from here on.
    ::setpgid(0, 0);
    ::signal(SIGPIPE, SIG_DFL);
    ::dup2(in.read.get(), STDIN_FILENO);
    ::dup2(out.write.get(), STDOUT_FILENO);
    ::dup2(err.write.get(), STDERR_FILENO);
    int code = 0;
    if (!cwd.empty() && ::chdir(cwd.c_str()) != 0) code = errno;
    if (code == 0 && max_procs > 0) {
      struct rlimit lim{static_cast<rlim_t>(max_procs), static_cast<rlim_t>(max_procs)};
      ::setrlimit(RLIMIT_NPROC, &lim);
    }
    if (code == 0) {
      ::execvp(argv[0], argv.data());
      code = errno;
    }
    [[maybe_unused]] auto w = ::write(status.write.get(), &code, sizeof(code));
    ::_exit(127);
  }

  ::setpgid(pid, pid);
  in.read.reset();
  out.write.reset();
  err.write.reset();
  status.write.reset();

  int exec_errno = 0;
  ssize_t got;
  do {
    got = ::read(status.read.get(), &exec_errno, sizeof(exec_errno));
  } while (got < 0 && errno == EINTR);
  if (got == static_cast<ssize_t>(sizeof(exec_errno))) {
    ::waitpid(pid, nullptr, 0);
    fail(ErrorCode::SandboxFailure,
         "cannot execute '" + spec.argv[0] + "': " + std::strerror(exec_errno));
  }

  ProcessResult result;
  set_nonblocking(out.read.get());
  set_nonblocking(err.read.get());
  set_nonblocking(in.write.get());
  std::size_t written = 0;
  if (spec.stdin_data.empty()) in.write.reset();

  const auto deadline = started + spec.timeout;
  int wstatus = 0;
  bool reaped = false;

  while (!reaped) {
    const auto now = Clock::now();
    if (now >= deadline) {
      result.timed_out = true;
      ::kill(-pid, SIGKILL);
      ::waitpid(pid, &wstatus, 0);
      reaped = true;
      break;
    }
    std::array<pollfd, 3> fds{};
    nfds_t n = 0;
    if (out.read) fds[n++] = {out.read.get(), POLLIN, 0};
    if (err.read) fds[n++] = {err.read.get(), POLLIN, 0};
    if (in.write) fds[n++] = {in.write.get(), POLLOUT, 0};
    const auto remaining =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
    ::poll(fds.data(), n, static_cast<int>(std::min<long long>(remaining + 1, 20)));

    if (out.read) drain(out.read, result.out, spec.max_output_bytes, result.out_truncated);
    if (err.read) drain(err.read, result.err, spec.max_output_bytes, result.err_truncated);
    if (in.write) {
      const ssize_t w = ::write(in.write.get(), spec.stdin_data.data() + written,
                                spec.stdin_data.size() - written);
      if (w > 0) written += static_cast<std::size_t>(w);
      if ((w < 0 && errno != EAGAIN && errno != EINTR) || written == spec.stdin_data.size()) {
        in.write.reset();
      }
    }
    const pid_t r = ::waitpid(pid, &wstatus, WNOHANG);
    if (r == pid) reaped = true;
  }
  result.wall = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - started);

  // Anything left in the group is an orphan of this run.
  ::kill(-pid, SIGKILL);
  in.write.reset();
  const auto drain_until = Clock::now() + std::chrono::milliseconds(200);
  while ((out.read || err.read) && Clock::now() < drain_until) {
    std::array<pollfd, 2> fds{};
    nfds_t n = 0;
    if (out.read) fds[n++] = {out.read.get(), POLLIN, 0};
    if (err.read) fds[n++] = {err.read.get(), POLLIN, 0};
    ::poll(fds.data(), n, 20);
    if (out.read) drain(out.read, result.out, spec.max_output_bytes, result.out_truncated);
    if (err.read) drain(err.read, result.err, spec.max_output_bytes, result.err_truncated);
  }

  if (!result.timed_out) {
    if (WIFEXITED(wstatus)) result.exit_code = WEXITSTATUS(wstatus);
    else if (WIFSIGNALED(wstatus)) result.term_signal = WTERMSIG(wstatus);
  } else if (WIFSIGNALED(wstatus)) {
    result.term_signal = WTERMSIG(wstatus);
  }
  return result;
}

}  // namespace transjudge
