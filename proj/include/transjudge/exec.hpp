#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "transjudge/corpus.hpp"
#include "transjudge/language.hpp"

namespace transjudge {

/// Per-language command set. argv templates may use {src}, {out}, {workdir},
/// {class} (entry class, Java) and {file} (public class, Java).
struct Toolchain {
  Language language = Language::Cpp;
  std::vector<std::string> compile_cmd;  // empty for interpreted languages
  std::vector<std::string> check_cmd;    // syntax-only pass standing in for compilation
  std::vector<std::string> run_cmd;
  std::vector<std::string> version_probe;
  std::string source_file;
  std::string output;
};

class ToolchainSet {
 public:
  /// g++ / javac+java / python3 from PATH.
  static ToolchainSet defaults();
  /// Defaults overlaid with the per-language entries of a toolchain config file.
  static ToolchainSet from_file(const std::filesystem::path& path);
  /// from_file($TRANSJUDGE_TOOLCHAINS) when set, defaults() otherwise.
  static ToolchainSet from_env();

  const Toolchain& get(Language lang) const;
  void set(Toolchain tc);

 private:
  std::map<Language, Toolchain> by_lang_;
};

/// Runs the version probe once per distinct probe argv (cached process-wide).
/// Returns the first line the probe printed; throws Error(ToolchainMissing)
/// naming the probe command when it cannot run or exits non-zero.
std::string probe_toolchain(const Toolchain& tc);

struct Limits {
  double compile_timeout_seconds = 60.0;
  double run_timeout_per_test_seconds = 10.0;
  std::size_t max_output_bytes = std::size_t{1} << 20;
  int max_processes = 4096;
};

void validate_limits(const Limits& limits);

enum class CompareMode { Strict, TokenFloat };

struct ComparePolicy {
  CompareMode mode = CompareMode::Strict;
  double abs_tolerance = 1e-6;
};

/// Strict: UTF-8 decode with replacement, trailing whitespace stripped per
/// line, trailing blank lines dropped, then exact equality. TokenFloat: tokens
/// that parse as numbers compare within abs_tolerance, others exactly.
bool compare_output(std::string_view actual, std::string_view expected,
                    const ComparePolicy& policy);

enum class Outcome { Success, CompilationError, RuntimeError, FunctionalError, NonTerminating };

inline constexpr std::array<Outcome, 5> kAllOutcomes = {
    Outcome::Success, Outcome::CompilationError, Outcome::RuntimeError, Outcome::FunctionalError,
    Outcome::NonTerminating};

std::string_view to_string(Outcome outcome);
std::optional<Outcome> parse_outcome(std::string_view text);

/// Partial-progress rank used when choosing among failed candidates:
/// Success > FunctionalError > RuntimeError > NonTerminating > CompilationError.
int progress_rank(Outcome outcome);

enum class RunStatus { Passed, WrongOutput, Crashed, TimedOut };

std::string_view to_string(RunStatus status);

struct RunResult {
  std::string test_id;
  RunStatus status = RunStatus::Passed;
  std::optional<int> exit_code;
  std::string stdout_data;  // truncated at max_output_bytes
  std::string stderr_data;  // truncated at max_output_bytes
  std::int64_t wall_ms = 0;
  std::string stdin_excerpt;     // first line of the test input, kept for diagnosis
  std::string expected_excerpt;  // head of the expected output
};

struct FailureInfo {
  std::string test_id;  // empty for compile-stage failures
  std::string stage;    // "compile" or "run"
  std::string diagnostic;
};

struct Verdict {
  Outcome outcome = Outcome::Success;
  int tests_passed = 0;
  int tests_total = 0;
  std::optional<FailureInfo> first_failure;
  std::string compile_log;
  std::vector<RunResult> failed_runs;  // first few non-passing runs, manifest order
};

nlohmann::json verdict_to_json(const Verdict& v);
Verdict verdict_from_json(const nlohmann::json& doc);

struct Workspace {
  std::filesystem::path dir;
  std::string entry_class;  // Java only
};

struct CompileResult {
  enum class Status { Ok, Failed, TimedOut };
  Status status = Status::Ok;
  std::string log;
  Workspace workspace;
};

/// Entry class of a Java program: the class declaring main(), else the first
/// public class, else "Main".
std::string detect_java_main_class(std::string_view code);

/// Writes `code` into `workdir` and compiles (or syntax-checks) it.
CompileResult compile(std::string_view code, const Toolchain& toolchain, const Limits& limits,
                      const std::filesystem::path& workdir);

RunResult run_test(const Toolchain& toolchain, const Workspace& workspace, const TestCase& test,
                   const Limits& limits, const ComparePolicy& policy);

/// Compile, then run every test in order. Outcome precedence: CompilationError,
/// then NonTerminating > RuntimeError > FunctionalError. After a second timeout
/// the remaining tests are skipped and count as not passed.
Verdict evaluate(std::string_view code, Language target, const std::vector<TestCase>& tests,
                 const Limits& limits, const ComparePolicy& policy,
                 const ToolchainSet& toolchains = ToolchainSet::from_env());

/// Scratch directory for one evaluation; removed on destruction unless kept.
class ScratchDir {
 public:
  ScratchDir();
  ~ScratchDir();
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace transjudge
