#include "transjudge/exec.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <regex>
#include <set>
#include <sstream>

#include "transjudge/code_scan.hpp"
#include "transjudge/error.hpp"
#include "transjudge/io.hpp"
#include "transjudge/process.hpp"

namespace transjudge {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Toolchains

ToolchainSet ToolchainSet::defaults() {
  ToolchainSet set;
  set.set({Language::Cpp,
           {"g++", "-std=c++17", "-O2", "-pipe", "-o", "{out}", "{src}"},
           {},
           {"{out}"},
           {"g++", "--version"},
           "main.cpp",
           "main"});
  set.set({Language::Java,
           {"javac", "-encoding", "UTF-8", "-d", "{workdir}", "{src}"},
           {},
           {"java", "-cp", "{workdir}", "{class}"},
           {"javac", "-version"},
           "{file}.java",
           "{class}.class"});
  set.set({Language::Python,
           {},
           {"python3", "-c",
            "import ast, sys; ast.parse(open(sys.argv[1], 'rb').read(), sys.argv[1])", "{src}"},
           {"python3", "{src}"},
           {"python3", "--version"},
           "main.py",
           ""});
  return set;
}

ToolchainSet ToolchainSet::from_file(const fs::path& path) {
  ToolchainSet set = defaults();
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    auto lang = parse_language(it.key());
    if (!lang) fail(ErrorCode::ConfigError, path.string() + ": unknown language " + it.key());
    Toolchain tc = set.get(*lang);
    const json& entry = it.value();
    auto argv = [&entry](const char* key, std::vector<std::string>& dst) {
      if (entry.contains(key)) {
        dst = entry.at(key).is_null() ? std::vector<std::string>{}
                                       : entry.at(key).get<std::vector<std::string>>();
      }
    };
    try {
      argv("compile", tc.compile_cmd);
      argv("check", tc.check_cmd);
      argv("run", tc.run_cmd);
      argv("probe", tc.version_probe);
      tc.source_file = entry.value("source_file", tc.source_file);
      tc.output = entry.value("output", tc.output);
    } catch (const json::exception& e) {
      fail(ErrorCode::ConfigError, path.string() + ": " + it.key() + ": " + e.what());
    }
    if (tc.run_cmd.empty() || tc.source_file.empty()) {
      fail(ErrorCode::ConfigError, path.string() + ": " + it.key() + " needs run and source_file");
    }
    set.set(std::move(tc));
  }
  return set;
}

ToolchainSet ToolchainSet::from_env() {
  if (const char* p = std::getenv("TRANSJUDGE_TOOLCHAINS"); p && *p) return from_file(p);
  return defaults();
}

const Toolchain& ToolchainSet::get(Language lang) const {
  auto it = by_lang_.find(lang);
  if (it == by_lang_.end()) {
    fail(ErrorCode::ToolchainMissing, "no toolchain configured for " +
                                          std::string(display_name(lang)));
  }
  return it->second;
}

void ToolchainSet::set(Toolchain tc) { by_lang_[tc.language] = std::move(tc); }

namespace {

std::string join_argv(const std::vector<std::string>& argv) {
  std::string s;
  for (const auto& a : argv) {
    if (!s.empty()) s += ' ';
    s += a;
  }
  return s;
}

std::chrono::milliseconds to_ms(double seconds) {
  return std::chrono::milliseconds(static_cast<std::int64_t>(std::llround(seconds * 1000.0)));
}

}  // namespace

std::string probe_toolchain(const Toolchain& tc) {
  static std::mutex mu;
  static std::map<std::string, std::optional<std::string>> cache;
  const std::string key = join_argv(tc.version_probe);
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find(key); it != cache.end()) {
      if (!it->second) fail(ErrorCode::ToolchainMissing, "probe failed: " + key);
      return *it->second;
    }
  }
  std::optional<std::string> version;
  if (!tc.version_probe.empty()) {
    try {
      ProcessSpec ps;
      ps.argv = tc.version_probe;
      ps.timeout = std::chrono::seconds(30);
      ProcessResult r = run_process(ps);
      if (r.ok()) {
        const std::string& text = scan::is_blank(r.out) ? r.err : r.out;
        auto lines = scan::split_lines(scan::strip_blank_edges(text));
        version = lines.empty() ? std::string() : std::string(scan::trim(lines.front()));
      }
    } catch (const Error&) {
      version.reset();
    }
  }
  std::lock_guard lock(mu);
  cache[key] = version;
  if (!version) fail(ErrorCode::ToolchainMissing, "probe failed: " + key);
  return *version;
}

void validate_limits(const Limits& limits) {
  if (!(limits.compile_timeout_seconds > 0) || !(limits.run_timeout_per_test_seconds > 0) ||
      limits.max_output_bytes == 0 || limits.max_processes <= 0) {
    fail(ErrorCode::ConfigError, "limits must all be positive");
  }
}

// ---------------------------------------------------------------------------
// Output comparison

namespace {

std::string decode_lossy(std::string_view bytes) {
  if (is_valid_utf8(bytes)) return std::string(bytes);
  std::string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  while (i < bytes.size()) {
    const auto c = static_cast<unsigned char>(bytes[i]);
    std::size_t len = c < 0x80 ? 1 : (c & 0xE0) == 0xC0 ? 2 : (c & 0xF0) == 0xE0 ? 3
                                  : (c & 0xF8) == 0xF0 ? 4 : 0;
    if (len != 0 && i + len <= bytes.size() && is_valid_utf8(bytes.substr(i, len))) {
      out.append(bytes.substr(i, len));
      i += len;
    } else {
      out += "\xEF\xBF\xBD";
      ++i;
    }
  }
  return out;
}

std::vector<std::string> normalized_lines(std::string_view bytes) {
  auto lines = scan::split_lines(decode_lossy(bytes));
  for (auto& l : lines) l = std::string(scan::rtrim(l));
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::optional<double> as_number(std::string_view token) {
  double v = 0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::vector<std::string> tokens(std::string_view bytes) {
  std::istringstream in(decode_lossy(bytes));
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

}  // namespace

bool compare_output(std::string_view actual, std::string_view expected,
                    const ComparePolicy& policy) {
  if (policy.mode == CompareMode::Strict) {
    return normalized_lines(actual) == normalized_lines(expected);
  }
  const auto a = tokens(actual);
  const auto e = tokens(expected);
  if (a.size() != e.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == e[i]) continue;
    auto x = as_number(a[i]);
    auto y = as_number(e[i]);
    if (!x || !y || std::fabs(*x - *y) > policy.abs_tolerance) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Outcomes

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Success: return "Success";
    case Outcome::CompilationError: return "CompilationError";
    case Outcome::RuntimeError: return "RuntimeError";
    case Outcome::FunctionalError: return "FunctionalError";
    case Outcome::NonTerminating: return "NonTerminating";
  }
  return "?";
}

std::optional<Outcome> parse_outcome(std::string_view text) {
  for (Outcome o : kAllOutcomes) {
    if (to_string(o) == text) return o;
  }
  return std::nullopt;
}

int progress_rank(Outcome outcome) {
  switch (outcome) {
    case Outcome::Success: return 4;
    case Outcome::FunctionalError: return 3;
    case Outcome::RuntimeError: return 2;
    case Outcome::NonTerminating: return 1;
    case Outcome::CompilationError: return 0;
  }
  return 0;
}

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Passed: return "Passed";
    case RunStatus::WrongOutput: return "WrongOutput";
    case RunStatus::Crashed: return "Crashed";
    case RunStatus::TimedOut: return "TimedOut";
  }
  return "?";
}

namespace {

std::optional<RunStatus> parse_run_status(std::string_view text) {
  for (RunStatus s : {RunStatus::Passed, RunStatus::WrongOutput, RunStatus::Crashed,
                      RunStatus::TimedOut}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

std::string head(std::string_view s, std::size_t n) {
  return std::string(s.substr(0, std::min(n, s.size())));
}

std::string scrub_path(std::string s, const fs::path& dir) {
  const std::string prefix = dir.string() + "/";
  for (auto at = s.find(prefix); at != std::string::npos; at = s.find(prefix, at)) s.erase(at, prefix.size());
  return s;
}

std::string tail(std::string_view s, std::size_t n) {
  return std::string(s.size() > n ? s.substr(s.size() - n) : s);
}

}  // namespace

json verdict_to_json(const Verdict& v) {
  json doc;
  doc["outcome"] = std::string(to_string(v.outcome));
  doc["tests_passed"] = v.tests_passed;
  doc["tests_total"] = v.tests_total;
  if (v.first_failure) {
    doc["first_failure"] = {{"test_id", v.first_failure->test_id},
                            {"stage", v.first_failure->stage},
                            {"diagnostic", v.first_failure->diagnostic}};
  } else {
    doc["first_failure"] = nullptr;
  }
  doc["compile_log"] = v.compile_log;
  json runs = json::array();
  for (const auto& r : v.failed_runs) {
    runs.push_back({{"test_id", r.test_id},
                    {"status", std::string(to_string(r.status))},
                    {"exit_code", r.exit_code ? json(*r.exit_code) : json(nullptr)},
                    {"stdout", r.stdout_data},
                    {"stderr", r.stderr_data},
                    {"wall_ms", r.wall_ms},
                    {"stdin_excerpt", r.stdin_excerpt},
                    {"expected_excerpt", r.expected_excerpt}});
  }
  doc["failed_runs"] = runs;
  return doc;
}

Verdict verdict_from_json(const json& doc) {
  Verdict v;
  auto outcome = parse_outcome(doc.at("outcome").get<std::string>());
  if (!outcome) fail(ErrorCode::ConfigError, "unknown outcome in verdict record");
  v.outcome = *outcome;
  v.tests_passed = doc.at("tests_passed").get<int>();
  v.tests_total = doc.at("tests_total").get<int>();
  if (doc.contains("first_failure") && !doc.at("first_failure").is_null()) {
    const json& f = doc.at("first_failure");
    v.first_failure = FailureInfo{f.at("test_id").get<std::string>(),
                                  f.at("stage").get<std::string>(),
                                  f.at("diagnostic").get<std::string>()};
  }
  v.compile_log = doc.value("compile_log", std::string());
  for (const json& r : doc.value("failed_runs", json::array())) {
    RunResult rr;
    rr.test_id = r.at("test_id").get<std::string>();
    rr.status = parse_run_status(r.at("status").get<std::string>()).value_or(RunStatus::Crashed);
    if (!r.at("exit_code").is_null()) rr.exit_code = r.at("exit_code").get<int>();
    rr.stdout_data = r.value("stdout", std::string());
    rr.stderr_data = r.value("stderr", std::string());
    rr.wall_ms = r.value("wall_ms", std::int64_t{0});
    rr.stdin_excerpt = r.value("stdin_excerpt", std::string());
    rr.expected_excerpt = r.value("expected_excerpt", std::string());
    v.failed_runs.push_back(std::move(rr));
  }
  return v;
}

// ---------------------------------------------------------------------------
// Compile and run

std::string detect_java_main_class(std::string_view code) {
  const std::string masked = scan::mask_literals(code, Language::Java);
  static const std::regex class_decl(R"(\b(class|interface|enum|record)\s+([A-Za-z_$][\w$]*))");
  static const std::regex main_decl(R"(\bstatic\s+(public\s+)?void\s+main\s*\()");
  static const std::regex public_class(R"(\bpublic\s+(final\s+|abstract\s+)*class\s+([A-Za-z_$][\w$]*))");

  std::smatch m;
  if (std::regex_search(masked, m, main_decl)) {
    const auto main_pos = static_cast<std::size_t>(m.position(0));
    std::string owner;
    for (auto it = std::sregex_iterator(masked.begin(), masked.end(), class_decl);
         it != std::sregex_iterator(); ++it) {
      if (static_cast<std::size_t>(it->position(0)) > main_pos) break;
      owner = (*it)[2].str();
    }
    if (!owner.empty()) return owner;
  }
  if (std::regex_search(masked, m, public_class)) return m[2].str();
  return "Main";
}

namespace {

std::string java_public_class(std::string_view code, const std::string& fallback) {
  const std::string masked = scan::mask_literals(code, Language::Java);
  static const std::regex public_type(
      R"(\bpublic\s+(final\s+|abstract\s+)*(class|interface|enum|record)\s+([A-Za-z_$][\w$]*))");
  std::smatch m;
  if (std::regex_search(masked, m, public_type)) return m[3].str();
  return fallback;
}

std::string expand(std::string arg, const std::map<std::string, std::string>& vars) {
  for (const auto& [key, value] : vars) {
    const std::string token = "{" + key + "}";
    for (auto pos = arg.find(token); pos != std::string::npos;
         pos = arg.find(token, pos + value.size())) {
      arg.replace(pos, token.size(), value);
    }
  }
  return arg;
}

std::map<std::string, std::string> placeholder_vars(const Toolchain& tc, const Workspace& ws,
                                                    const std::string& file_class) {
  std::map<std::string, std::string> vars{{"workdir", ws.dir.string()},
                                          {"class", ws.entry_class},
                                          {"file", file_class}};
  vars["src"] = (ws.dir / expand(tc.source_file, vars)).string();
  vars["out"] = tc.output.empty() ? std::string() : (ws.dir / expand(tc.output, vars)).string();
  return vars;
}

std::vector<std::string> expand_argv(const std::vector<std::string>& argv,
                                     const std::map<std::string, std::string>& vars) {
  std::vector<std::string> out;
  out.reserve(argv.size());
  for (const auto& a : argv) out.push_back(expand(a, vars));
  return out;
}

}  // namespace

CompileResult compile(std::string_view code, const Toolchain& toolchain, const Limits& limits,
                      const fs::path& workdir) {
  probe_toolchain(toolchain);
  std::error_code ec;
  if (!fs::is_directory(workdir, ec)) {
    fail(ErrorCode::SandboxFailure, "workdir does not exist: " + workdir.string());
  }

  CompileResult result;
  result.workspace.dir = workdir;
  std::string file_class;
  if (toolchain.language == Language::Java) {
    result.workspace.entry_class = detect_java_main_class(code);
    file_class = java_public_class(code, result.workspace.entry_class);
  }
  const auto vars = placeholder_vars(toolchain, result.workspace, file_class);
  write_file_atomic(vars.at("src"), code);

  const auto& cmd = toolchain.compile_cmd.empty() ? toolchain.check_cmd : toolchain.compile_cmd;
  if (cmd.empty()) return result;

  ProcessSpec ps;
  ps.argv = expand_argv(cmd, vars);
  ps.cwd = workdir;
  ps.timeout = to_ms(limits.compile_timeout_seconds);
  ps.max_output_bytes = limits.max_output_bytes;
  ProcessResult r;
  try {
    r = run_process(ps);
  } catch (const Error& e) {
    fail(ErrorCode::ToolchainMissing, join_argv(ps.argv) + ": " + e.what());
  }
  result.log = r.out;
  if (!r.err.empty()) {
    if (!result.log.empty() && result.log.back() != '\n') result.log += '\n';
    result.log += r.err;
  }
  if (r.timed_out) {
    result.status = CompileResult::Status::TimedOut;
    result.log += "\ncompilation timed out";
  } else if (!r.ok()) {
    result.status = CompileResult::Status::Failed;
  }
  return result;
}

RunResult run_test(const Toolchain& toolchain, const Workspace& workspace, const TestCase& test,
                   const Limits& limits, const ComparePolicy& policy) {
  const auto vars = placeholder_vars(toolchain, workspace, workspace.entry_class);
  ProcessSpec ps;
  ps.argv = expand_argv(toolchain.run_cmd, vars);
  ps.cwd = workspace.dir;
  ps.stdin_data = test.stdin_data;
  ps.timeout = to_ms(limits.run_timeout_per_test_seconds);
  ps.max_output_bytes = limits.max_output_bytes;
  ps.max_processes = limits.max_processes;
  ProcessResult r = run_process(ps);

  RunResult rr;
  rr.test_id = test.id;
  rr.exit_code = r.exit_code;
  rr.wall_ms = r.wall.count();
  rr.stdout_data = std::move(r.out);
  rr.stderr_data = std::move(r.err);
  if (r.timed_out) {
    rr.status = RunStatus::TimedOut;
  } else if (!r.exit_code || *r.exit_code != 0) {
    rr.status = RunStatus::Crashed;
    if (r.term_signal && !rr.exit_code) rr.exit_code = 128 + *r.term_signal;
  } else if (compare_output(rr.stdout_data, test.expected_stdout, policy)) {
    rr.status = RunStatus::Passed;
  } else {
    rr.status = RunStatus::WrongOutput;
  }
  return rr;
}

namespace {

constexpr std::size_t kKeptFailures = 8;
constexpr std::size_t kExcerpt = 2000;

std::string run_diagnostic(const RunResult& r, const Limits& limits) {
  switch (r.status) {
    case RunStatus::TimedOut: {
      std::ostringstream s;
      s << "no termination within " << limits.run_timeout_per_test_seconds << "s";
      return s.str();
    }
    case RunStatus::Crashed:
      return "exit code " + std::to_string(r.exit_code.value_or(-1)) + "\n" +
             tail(r.stderr_data, kExcerpt);
    case RunStatus::WrongOutput:
      return "expected: " + head(r.expected_excerpt, 200) + "\nactual: " +
             head(r.stdout_data, 200);
    case RunStatus::Passed: break;
  }
  return {};
}

}  // namespace

Verdict evaluate(std::string_view code, Language target, const std::vector<TestCase>& tests,
                 const Limits& limits, const ComparePolicy& policy,
                 const ToolchainSet& toolchains) {
  if (tests.empty()) fail(ErrorCode::PreconditionViolation, "evaluate needs at least one test");
  validate_limits(limits);

  Verdict v;
  v.tests_total = static_cast<int>(tests.size());
  if (scan::is_blank(code)) {
    v.outcome = Outcome::CompilationError;
    v.compile_log = "empty program";
    v.first_failure = FailureInfo{"", "compile", "empty program"};
    return v;
  }

  const Toolchain& tc = toolchains.get(target);
  ScratchDir scratch;
  CompileResult built = compile(code, tc, limits, scratch.path());
  built.log = scrub_path(std::move(built.log), scratch.path());
  v.compile_log = built.log;
  if (built.status != CompileResult::Status::Ok) {
    v.outcome = Outcome::CompilationError;
    v.first_failure = FailureInfo{"", "compile", tail(built.log, kExcerpt)};
    return v;
  }

  bool any_timeout = false, any_crash = false, any_wrong = false;
  int timeouts = 0;
  for (const auto& test : tests) {
    RunResult r = run_test(tc, built.workspace, test, limits, policy);
    if (r.status == RunStatus::Passed) {
      ++v.tests_passed;
      continue;
    }
    r.stderr_data = scrub_path(std::move(r.stderr_data), scratch.path());
    any_timeout |= r.status == RunStatus::TimedOut;
    any_crash |= r.status == RunStatus::Crashed;
    any_wrong |= r.status == RunStatus::WrongOutput;
    r.stdin_excerpt = head(test.stdin_data.substr(0, test.stdin_data.find('\n')), 200);
    r.expected_excerpt = head(test.expected_stdout, kExcerpt);
    if (!v.first_failure) v.first_failure = FailureInfo{test.id, "run", run_diagnostic(r, limits)};
    if (v.failed_runs.size() < kKeptFailures) {
      r.stdout_data = head(r.stdout_data, kExcerpt);
      r.stderr_data = tail(r.stderr_data, kExcerpt);
      v.failed_runs.push_back(std::move(r));
    }
    if (any_timeout && ++timeouts >= 2 && r.status == RunStatus::TimedOut) break;
  }

  if (any_timeout) v.outcome = Outcome::NonTerminating;
  else if (any_crash) v.outcome = Outcome::RuntimeError;
  else if (any_wrong) v.outcome = Outcome::FunctionalError;
  else v.outcome = Outcome::Success;
  return v;
}

// ---------------------------------------------------------------------------

ScratchDir::ScratchDir() {
  std::string tmpl = (fs::temp_directory_path() / "transjudge-XXXXXX").string();
  if (::mkdtemp(tmpl.data()) == nullptr) {
    fail(ErrorCode::SandboxFailure, "mkdtemp failed under " + fs::temp_directory_path().string());
  }
  path_ = tmpl;
}

ScratchDir::~ScratchDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

}  // namespace transjudge
