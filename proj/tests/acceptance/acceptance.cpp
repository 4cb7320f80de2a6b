// Acceptance suite: one line per criterion, non-zero exit when any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "test_support.hpp"
#include "transjudge/code_scan.hpp"
#include "transjudge/corpus.hpp"
#include "transjudge/error.hpp"
#include "transjudge/exec.hpp"
#include "transjudge/io.hpp"
#include "transjudge/pipeline.hpp"
#include "transjudge/prompt.hpp"
#include "transjudge/rectify.hpp"
#include "transjudge/report.hpp"
#include "transjudge/taxonomy.hpp"

using namespace transjudge;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

inline std::string scan_strip(const std::string& s) { return transjudge::scan::strip_blank_edges(s); }
inline std::size_t read_lines_of(const std::string& s) {
  std::size_t n = 0;
  for (const auto& line : transjudge::scan::split_lines(s)) n += line.empty() ? 0 : 1;
  return n;
}

namespace {

struct Checker {
  std::vector<std::string> failures;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  template <class A, class B>
  void equal(const A& actual, const B& expected, const std::string& what) {
    if (!(actual == expected)) {
      std::ostringstream s;
      s << what << ": got '" << actual << "', want '" << expected << "'";
      failures.push_back(s.str());
    }
  }
};

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

const std::string& cell(const Table& t, const std::string& backend_or_first, const std::string& column) {
  std::size_t col = 0;
  while (col < t.columns.size() && t.columns[col] != column) ++col;
  for (const auto& row : t.rows) {
    if (std::find(row.begin(), row.end(), backend_or_first) != row.end()) return row.at(col);
  }
  throw std::runtime_error("no row " + backend_or_first + " in " + t.name);
}

// --- AC1 ----------------------------------------------------------------------

void aggregation_fidelity(Checker& c) {
  const auto started = Clock::now();
  using testsupport::make_records;
  using testsupport::make_repairs;

  auto records = make_records("set-a", Language::Cpp, Language::Java, "model-a", {170, 247, 69, 44, 2});
  const auto t_success = success_table(make_records("set-a", Language::Cpp, Language::Java, "model-a", {170, 30, 0, 0, 0}));
  c.equal(cell(t_success, "model-a", "Rate"), "85.0%", "success rate set-a C++->Java");
  const auto t_set_b = success_table(make_records("set-b", Language::Python, Language::Java, "model-a", {95, 155, 0, 0, 0}));
  c.equal(cell(t_set_b, "model-a", "Rate"), "38.0%", "success rate set-b Python->Java");

  const auto t_breakdown = error_breakdown(records);
  c.equal(cell(t_breakdown, "model-a", "Compilation Error"), "68.2%", "breakdown compilation");
  c.equal(cell(t_breakdown, "model-a", "Runtime Error"), "19.1%", "breakdown runtime");
  c.equal(cell(t_breakdown, "model-a", "Functional Error"), "12.2%", "breakdown functional");
  c.equal(cell(t_breakdown, "model-a", "Non-terminating Execution"), "0.6%", "breakdown non-terminating");

  struct Shape {
    Language src, dst;
    std::array<int, 5> counts;
    std::array<const char*, 4> shares;
  };
  for (const Shape& s : {Shape{Language::Java, Language::Cpp, {0, 103, 2, 48, 2}, {"66.5%", "1.3%", "31.0%", "1.3%"}},
                         Shape{Language::Python, Language::Cpp, {0, 100, 1, 61, 2}, {"61.0%", "0.6%", "37.2%", "1.2%"}}}) {
    const auto cellv = breakdown_cell(make_records("set-a", s.src, s.dst, "m", s.counts));
    for (std::size_t i = 0; i < 4; ++i) c.equal(cellv.shares[i], std::string(s.shares[i]), "breakdown column");
  }

  const std::vector<std::array<double, 4>> reference_columns = {
      {68.2, 19.1, 12.2, 0.6}, {47.5, 33.7, 18.4, 0.4}, {66.5, 1.3, 31.0, 1.3}, {39.1, 46.6, 13.8, 0.6},
      {61.0, 0.6, 37.2, 1.2},  {64.7, 22.8, 12.1, 0.4}, {55.7, 1.6, 40.1, 2.6}, {36.9, 38.4, 23.7, 1.0},
      {48.9, 1.3, 46.7, 3.0},  {50.1, 25.4, 23.4, 1.2}};
  for (const auto& col : reference_columns) {
    const double sum = col[0] + col[1] + col[2] + col[3];
    c.expect(std::abs(sum - 100.0) <= 0.1 + 1e-9, "reference breakdown column sums to " + std::to_string(sum));
  }

  const auto t_repair = repair_table(make_repairs("set-a", Language::Python, Language::Java, "corrector-a", 90, 22));
  c.equal(cell(t_repair, "corrector-a", "Invalid/Repaired (Rate)"), "90/22 (24.4%)", "repair cell set-a");
  const auto t_cross = repair_table(make_repairs("set-b", Language::Java, Language::Python, "cross", 81, 35));
  c.equal(cell(t_cross, "cross", "Invalid/Repaired (Rate)"), "81/35 (43.2%)", "repair cell set-b");

  for (const auto& t : {t_success, t_breakdown, t_repair}) {
    c.expect(render(t, ReportFormat::Markdown) == render(t, ReportFormat::Markdown), "render determinism");
  }
  c.expect(render(t_success, ReportFormat::Markdown).find("| 85.0% |") != std::string::npos, "85.0% in markdown");
  c.expect(seconds_since(started) < 5.0, "runtime under 5 s");
}

// --- AC2 / AC10 shared oracle run --------------------------------------------

struct OracleRun {
  std::vector<testsupport::OracleCase> cases;
  std::vector<Verdict> verdicts;
  double seconds = 0;
};

OracleRun run_oracle() {
  OracleRun run;
  run.cases = testsupport::oracle_cases();
  Limits limits;
  limits.run_timeout_per_test_seconds = 2.0;
  const auto tcs = testsupport::toolchains();
  const auto started = Clock::now();
  for (const auto& oc : run.cases) run.verdicts.push_back(evaluate(oc.code, oc.language, oc.tests, limits, {}, tcs));
  run.seconds = seconds_since(started);
  return run;
}

void verdict_oracle(Checker& c, const OracleRun& run) {
  c.expect(run.cases.size() >= 20, "at least 20 oracle programs");
  std::set<Language> langs;
  std::map<Outcome, int> per_class;
  for (std::size_t i = 0; i < run.cases.size(); ++i) {
    const auto& oc = run.cases[i];
    langs.insert(oc.language);
    ++per_class[oc.expected];
    c.equal(to_string(run.verdicts[i].outcome), to_string(oc.expected), oc.id);
  }
  c.expect(langs.size() == 3, "all three languages covered");
  for (Outcome o : kAllOutcomes) c.expect(per_class[o] >= 3, "each outcome covered per language");
  c.expect(run.seconds < 180.0, "oracle suite under 3 min (" + std::to_string(run.seconds) + " s)");
}

// --- AC3 ----------------------------------------------------------------------

void non_termination_bound(Checker& c) {
  const auto cases = testsupport::oracle_cases();
  const auto tcs = testsupport::toolchains();
  for (const auto& oc : cases) {
    if (oc.expected != Outcome::NonTerminating) continue;
    for (double t : {1.0, 2.0}) {
      Limits limits;
      limits.run_timeout_per_test_seconds = t;
      const std::vector<TestCase> one = {oc.tests.front()};
      const auto v = evaluate(oc.code, oc.language, one, limits, {}, tcs);
      const std::string tag = oc.id + " T=" + std::to_string(static_cast<int>(t)) + "s";
      c.equal(to_string(v.outcome), "NonTerminating", tag);
      if (v.failed_runs.empty()) {
        c.expect(false, tag + ": no run recorded");
        continue;
      }
      const double wall = static_cast<double>(v.failed_runs.front().wall_ms) / 1000.0;
      c.expect(wall >= t && wall <= t + 1.0, tag + ": wall " + std::to_string(wall) + " s");
    }
  }
}

// --- CLI helpers --------------------------------------------------------------

bool cli_ok(Checker& c, const std::vector<std::string>& args) {
  const auto r = testsupport::run_cli(args);
  if (r.exit_code != 0) {
    c.expect(false, args.front() + " exited " + std::to_string(r.exit_code.value_or(-1)) + ": " + r.err);
    return false;
  }
  return true;
}

std::map<std::string, nlohmann::json> latest_by_task(const fs::path& jsonl) {
  std::map<std::string, nlohmann::json> out;
  if (!fs::exists(jsonl)) return out;
  for (const auto& line : read_lines(jsonl)) {
    auto doc = nlohmann::json::parse(line);
    out[doc.at("task_id").get<std::string>()] = doc;
  }
  return out;
}

// --- AC4 ----------------------------------------------------------------------

void rule_case_studies(Checker& c, const fs::path& scratch) {
  const auto started = Clock::now();
  const fs::path run = scratch / "cases-run";
  const auto cfg = testsupport::stage_config("cases", run).string();
  const auto cassette = (testsupport::fixtures() / "cases" / "cassette.jsonl").string();
  if (!cli_ok(c, {"translate", "--config", cfg, "--replay", cassette}) || !cli_ok(c, {"evaluate", "--config", cfg}) ||
      !cli_ok(c, {"repair", "--config", cfg, "--chain", "rules"})) {
    return;
  }
  const auto verdicts = latest_by_task(run / "verdicts.jsonl");
  const auto attempts = latest_by_task(run / "attempts.jsonl");
  const std::map<std::string, std::string> targeted = {
      {"cases__scanner__python-java", "R-IMPORT"},
      {"cases__seven__python-cpp", "R-FORELSE"},
      {"cases__ceil__java-python", "R-INTDIV"},
      {"cases__twosum__cpp-python", "R-INPUTSPLIT"}};
  int repaired = 0;
  for (const auto& [task, rule] : targeted) {
    const auto v = verdicts.find(task);
    if (v == verdicts.end()) {
      c.expect(false, task + ": no verdict");
      continue;
    }
    c.expect(v->second.at("verdict").at("outcome") != "Success", task + " fails before repair");
    const auto a = attempts.find(task);
    if (a == attempts.end()) {
      c.expect(false, task + ": no repair attempt");
      continue;
    }
    const bool ok = a->second.at("success").get<bool>() && a->second.at("after").at("outcome") == "Success";
    c.expect(ok, task + " repaired");
    c.equal(a->second.at("corrector").get<std::string>(), rule, task + " corrector");
    repaired += ok ? 1 : 0;
  }
  c.equal(repaired, 4, "targeted fixtures repaired");
  c.expect(seconds_since(started) < 60.0, "case studies under 1 min");
}

// --- AC5 ----------------------------------------------------------------------

void transition_conservation(Checker& c) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> size(0, 60), before(1, 4), after(0, 4);
  for (int trial = 0; trial < 1500; ++trial) {
    std::vector<ResultRecord> batch;
    std::array<std::int64_t, 5> per_before{};
    const int n = size(rng);
    for (int i = 0; i < n; ++i) {
      ResultRecord r;
      r.phase = "repair";
      r.before_outcome = kAllOutcomes[static_cast<std::size_t>(before(rng))];
      r.outcome = kAllOutcomes[static_cast<std::size_t>(after(rng))];
      ++per_before[outcome_index(*r.before_outcome)];
      batch.push_back(r);
    }
    const auto m = transition_matrix(batch);
    for (Outcome o : kAllOutcomes) {
      if (m.row_sum(o) != per_before[outcome_index(o)]) {
        c.expect(false, "row sum mismatch in trial " + std::to_string(trial));
        return;
      }
    }
    if (m.total() != n) {
      c.expect(false, "total mismatch in trial " + std::to_string(trial));
      return;
    }
    const auto table = transition_table(m);
    std::int64_t rendered = 0;
    for (const auto& row : table.rows) {
      for (std::size_t k = 1; k <= kAllOutcomes.size(); ++k) rendered += std::stoll(row[k]);
    }
    if (rendered != n) {
      c.expect(false, "rendered table total mismatch in trial " + std::to_string(trial));
      return;
    }
  }
}

// --- AC6 ----------------------------------------------------------------------

void split_determinism(Checker& c) {
  std::mt19937_64 rng(7);
  for (std::size_t n : {1u, 10u, 100u, 1099u}) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("task-" + std::to_string(i));
    for (int s = 0; s < 25; ++s) {
      const std::uint64_t seed = rng();
      const auto a = split_tasks(ids, {0.8, 0.1, 0.1}, seed);
      const auto b = split_tasks(ids, {0.8, 0.1, 0.1}, seed);
      const std::size_t train = static_cast<std::size_t>(std::floor(0.8 * static_cast<double>(n)));
      const std::size_t valid = static_cast<std::size_t>(std::floor(0.1 * static_cast<double>(n)));
      const std::string tag = "n=" + std::to_string(n);
      c.equal(a.train.size(), train, tag + " train size");
      c.equal(a.valid.size(), valid, tag + " valid size");
      c.equal(a.test.size(), n - train - valid, tag + " test size");
      c.expect(split_to_json(a) == split_to_json(b), tag + " deterministic");
      std::multiset<std::string> all(a.train.begin(), a.train.end());
      all.insert(a.valid.begin(), a.valid.end());
      all.insert(a.test.begin(), a.test.end());
      c.expect(all == std::multiset<std::string>(ids.begin(), ids.end()), tag + " disjoint union");
    }
  }
}

// --- AC7 ----------------------------------------------------------------------

void extraction_suite(Checker& c) {
  const auto doc = nlohmann::json::parse(read_file(testsupport::fixtures() / "extraction_cases.json"));
  c.expect(doc.size() >= 15, "at least 15 extraction fixtures");
  std::set<std::string> methods;
  for (const auto& ex : doc) {
    std::optional<std::string> sentinel;
    if (!ex.at("sentinel").is_null()) sentinel = ex.at("sentinel").get<std::string>();
    const auto r = extract_code(ex.at("raw").get<std::string>(), *parse_language(ex.at("target").get<std::string>()),
                                sentinel);
    const std::string name = ex.at("name");
    c.equal(r.code, ex.at("code").get<std::string>(), name + " code");
    c.equal(std::string(to_string(r.method)), ex.at("method").get<std::string>(), name + " method");
    methods.insert(std::string(to_string(r.method)));
  }
  c.expect(methods.size() == 4, "all extraction methods exercised");

  std::mt19937_64 rng(99);
  int checked = 0;
  for (int i = 0; i < 500; ++i) {
    const std::string body = testsupport::random_code_body(rng);
    const std::string expected = scan_strip(body);
    if (expected.empty()) continue;
    ++checked;
    for (Language target : kAllLanguages) {
      const std::string tag(to_id(target));
      const auto r = extract_code("Translation:\n```" + tag + "\n" + body + "```\nDone.\n", target, std::nullopt);
      if (r.code != expected) {
        c.expect(false, "fence round trip failed for body:\n" + body);
        return;
      }
    }
  }
  c.expect(checked >= 200, "enough random bodies");
}

// --- AC8 ----------------------------------------------------------------------

std::map<std::string, std::string> replay_pipeline(Checker& c, const fs::path& run) {
  std::map<std::string, std::string> artifacts;
  const auto cfg = testsupport::stage_config("mini", run).string();
  const auto cassette = (testsupport::fixtures() / "mini" / "cassette.jsonl").string();
  if (!cli_ok(c, {"translate", "--config", cfg, "--replay", cassette}) || !cli_ok(c, {"evaluate", "--config", cfg}) ||
      !cli_ok(c, {"report", "--config", cfg, "--format", "md"}) ||
      !cli_ok(c, {"report", "--config", cfg, "--format", "json"})) {
    return artifacts;
  }
  artifacts["results.jsonl"] = canonicalize_log(read_file(run / "results.jsonl"));
  for (const auto& entry : fs::directory_iterator(run / "reports")) {
    artifacts["reports/" + entry.path().filename().string()] = read_file(entry.path());
  }
  return artifacts;
}

void replay_determinism(Checker& c, const fs::path& scratch) {
  const auto first = replay_pipeline(c, scratch / "replay-a");
  const auto second = replay_pipeline(c, scratch / "replay-b");
  c.expect(!first.empty(), "artifacts produced");
  c.expect(first.size() == second.size(), "same artifact set");
  for (const auto& [name, body] : first) {
    const auto it = second.find(name);
    c.expect(it != second.end() && it->second == body, name + " byte-identical");
  }
  c.expect(first.count("results.jsonl") && read_lines_of(first.at("results.jsonl")) == 6, "one record per task");
}

// --- AC9 ----------------------------------------------------------------------

void pair_export(Checker& c, const fs::path& scratch) {
  const fs::path run = scratch / "pairs-run";
  const auto cfg = testsupport::stage_config("mini", run).string();
  const auto cassette = (testsupport::fixtures() / "mini" / "cassette.jsonl").string();
  const auto fixes = (testsupport::fixtures() / "manual_fixes").string();
  if (!cli_ok(c, {"translate", "--config", cfg, "--replay", cassette}) || !cli_ok(c, {"evaluate", "--config", cfg}) ||
      !cli_ok(c, {"repair", "--config", cfg, "--chain", "rules"}) ||
      !cli_ok(c, {"export-pairs", "--config", cfg, "--manual-fixes", fixes})) {
    return;
  }
  const Corpus corpus = load_manifest(testsupport::fixtures() / "mini" / "manifest.json");
  const auto tcs = testsupport::toolchains();
  Limits limits;
  limits.run_timeout_per_test_seconds = 1.0;
  const auto lines = read_lines(run / "pairs.jsonl");
  c.expect(lines.size() >= 4, "pairs exported (" + std::to_string(lines.size()) + ")");
  bool manual_seen = false;
  for (const auto& line : lines) {
    const auto doc = nlohmann::json::parse(line);
    const std::string task = doc.at("task_id");
    const SourceProgram* program = nullptr;
    for (const auto& p : corpus.programs) {
      if (task.find("__" + p.id + "__") != std::string::npos) program = &p;
    }
    if (!program) {
      c.expect(false, "pair for unknown task " + task);
      continue;
    }
    const Language target = *parse_language(doc.at("target_lang").get<std::string>());
    const auto valid = evaluate(doc.at("valid_code").get<std::string>(), target, program->tests, limits, {}, tcs);
    const auto invalid = evaluate(doc.at("invalid_code").get<std::string>(), target, program->tests, limits, {}, tcs);
    c.equal(to_string(valid.outcome), "Success", task + " valid side");
    c.expect(invalid.outcome != Outcome::Success, task + " invalid side fails");
    manual_seen = manual_seen || task == "mini__countdown__java-python";
  }
  c.expect(manual_seen, "manual fix for the non-terminating task exported");

  // The broken manual fix must be rejected.
  const SourceProgram* half = corpus.find("half");
  PairSource src;
  src.task = {"mini__half__java-python", "half", Language::Java, Language::Python};
  src.tests = half->tests;
  src.origin_backend = "fixture-translator";
  src.attempt.task_id = src.task.task_id;
  src.attempt.code_before = "n = int(input())\nprint(n / 2)\n";
  src.attempt.before = evaluate(src.attempt.code_before, Language::Python, half->tests, limits, {}, tcs);
  src.attempt.code_after = src.attempt.code_before;
  src.attempt.after = src.attempt.before;
  const auto r = export_pairs({src}, testsupport::fixtures() / "manual_fixes", scratch / "broken.jsonl", limits, {}, tcs);
  c.equal(r.count, 0u, "broken manual fix exported");
  c.expect(r.rejected.size() == 1 && r.rejected[0].rfind("UnverifiedValidCode", 0) == 0,
           "broken manual fix rejected with UnverifiedValidCode");
}

// --- AC10 ---------------------------------------------------------------------

Language other_than(Language l) { return l == Language::Python ? Language::Java : Language::Python; }

void taxonomy_closure(Checker& c, const OracleRun& first) {
  const OracleRun second = run_oracle();
  std::vector<CategoryLabel> labels;
  for (std::size_t i = 0; i < first.cases.size(); ++i) {
    const auto& oc = first.cases[i];
    if (first.verdicts[i].outcome == Outcome::Success || second.verdicts[i].outcome == Outcome::Success) continue;
    const auto a = classify(oc.id, first.verdicts[i], oc.code, "", oc.language, other_than(oc.language));
    const auto b = classify(oc.id, second.verdicts[i], oc.code, "", oc.language, other_than(oc.language));
    c.expect(a == b, oc.id + " label differs across runs: " + a.evidence + " vs " + b.evidence);
    labels.push_back(a);
  }
  double sum = 0;
  for (const auto& [cat, f] : distribution(labels)) sum += f;
  c.expect(std::abs(sum - 1.0) <= 1e-9, "distribution sums to 1");

  const Corpus corpus = load_manifest(testsupport::fixtures() / "cases" / "manifest.json");
  const auto tcs = testsupport::toolchains();
  Limits limits;
  limits.run_timeout_per_test_seconds = 2.0;
  struct Expect {
    const char* program;
    Language target;
    const char* ext;
    ErrorCategory category;
  };
  for (const Expect& e : {Expect{"scanner", Language::Java, "java", ErrorCategory::DependencyError},
                          Expect{"seven", Language::Cpp, "cpp", ErrorCategory::SyntacticDifference},
                          Expect{"ceil", Language::Python, "py", ErrorCategory::SemanticDifference}}) {
    const SourceProgram* p = corpus.find(e.program);
    const std::string raw =
        read_file(testsupport::fixtures() / "cases" / "completions" / (std::string(e.program) + "." + e.ext + ".txt"));
    const std::string code = extract_code(raw, e.target, std::string(kDefaultSentinel)).code;
    const auto v = evaluate(code, e.target, p->tests, limits, {}, tcs);
    if (v.outcome == Outcome::Success) {
      c.expect(false, std::string(e.program) + " unexpectedly passes");
      continue;
    }
    const auto label = classify(e.program, v, code, p->code, e.target, p->language);
    c.equal(std::string(to_string(label.category)), std::string(to_string(e.category)), e.program);
  }
}

}  // namespace

int main() {
  testsupport::export_toolchains_env();
  ScratchDir scratch;
  int failed = 0;
  OracleRun oracle;

  const std::vector<std::pair<std::string, std::function<void(Checker&)>>> criteria = {
      {"AC1 aggregation fidelity", aggregation_fidelity},
      {"AC2 verdict oracle suite",
       [&](Checker& c) {
         oracle = run_oracle();
         verdict_oracle(c, oracle);
       }},
      {"AC3 non-termination bound", non_termination_bound},
      {"AC4 rule-corrector case studies", [&](Checker& c) { rule_case_studies(c, scratch.path()); }},
      {"AC5 transition conservation", transition_conservation},
      {"AC6 split determinism and ratios", split_determinism},
      {"AC7 extraction suite", extraction_suite},
      {"AC8 end-to-end replay determinism", [&](Checker& c) { replay_determinism(c, scratch.path()); }},
      {"AC9 pair-export integrity", [&](Checker& c) { pair_export(c, scratch.path()); }},
      {"AC10 taxonomy determinism and closure", [&](Checker& c) { taxonomy_closure(c, oracle); }},
  };

  for (const auto& [name, run] : criteria) {
    Checker c;
    const auto started = Clock::now();
    try {
      run(c);
    } catch (const std::exception& e) {
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    const bool ok = c.failures.empty();
    failed += ok ? 0 : 1;
    std::printf("[%s] %s (%.2f s)\n", ok ? "PASS" : "FAIL", name.c_str(), seconds_since(started));
    for (const auto& f : c.failures) std::printf("       - %s\n", f.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
