#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace transjudge {

struct ProcessSpec {
  std::vector<std::string> argv;
  std::filesystem::path cwd;  // empty: inherit
  std::string stdin_data;
  std::chrono::milliseconds timeout{10'000};
  std::size_t max_output_bytes = 1u << 20;
  int max_processes = 0;  // RLIMIT_NPROC for the child; 0 leaves it alone
};

struct ProcessResult {
  bool timed_out = false;
  std::optional<int> exit_code;    // set when the child exited normally
  std::optional<int> term_signal;  // set when a signal ended it
  std::string out;
  std::string err;
  bool out_truncated = false;
  bool err_truncated = false;
  std::chrono::milliseconds wall{0};

  bool ok() const { return !timed_out && exit_code && *exit_code == 0; }
};

/// Runs argv in its own process group with the given stdin. On timeout the
/// whole group is SIGKILLed; the group is also reaped after a normal exit so
/// stray grandchildren never outlive the call. Output beyond the cap is read
/// and discarded. Throws Error(SandboxFailure) if the program cannot be spawned.
ProcessResult run_process(const ProcessSpec& spec);

/// True if argv[0] resolves to an executable (directly or through PATH).
bool executable_available(const std::string& program);

}  // namespace transjudge
