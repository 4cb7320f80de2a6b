#include <doctest.h>

#include "test_support.hpp"
#include "transjudge/backend.hpp"
#include "transjudge/error.hpp"
#include "transjudge/io.hpp"
#include "transjudge/rectify.hpp"

using namespace transjudge;

namespace {

Verdict failed(Outcome o, std::string diagnostic, std::string stderr_text = "") {
  Verdict v;
  v.outcome = o;
  v.tests_total = 1;
  v.first_failure = FailureInfo{o == Outcome::CompilationError ? "" : "t1",
                                o == Outcome::CompilationError ? "compile" : "run", diagnostic};
  if (o == Outcome::CompilationError) v.compile_log = diagnostic;
  if (!stderr_text.empty()) {
    RunResult r;
    r.test_id = "t1";
    r.status = RunStatus::Crashed;
    r.exit_code = 1;
    r.stderr_data = stderr_text;
    v.failed_runs.push_back(r);
  }
  return v;
}

const RuleCandidate* find_rule(const std::vector<RuleCandidate>& cands, const std::string& id) {
  for (const auto& c : cands) {
    if (c.rule_id == id) return &c;
  }
  return nullptr;
}

RepairSettings settings() {
  RepairSettings s;
  s.limits.run_timeout_per_test_seconds = 2;
  s.toolchains = testsupport::toolchains();
  return s;
}

std::shared_ptr<Backend> canned_model(const std::string& code) {
  BackendSpec spec;
  spec.name = "canned";
  spec.kind = BackendKind::Command;
  spec.endpoint_or_cmd = "cat >/dev/null; printf '%s\\n|End-of-Code|\\n' '" + code + "'";
  spec.timeout_seconds = 10;
  return std::make_shared<Backend>(spec);
}

}  // namespace

TEST_SUITE("rectify") {
  TEST_CASE("import rule inserts after the package line") {
    const std::string code =
        "package demo;\npublic class Main {\n  public static void main(String[] a) {\n"
        "    Scanner sc = new Scanner(System.in);\n    List<Integer> xs = new ArrayList<>();\n  }\n}\n";
    const auto v = failed(Outcome::CompilationError, "  symbol:   class Scanner\n");
    const auto cands = apply_rules(code, "", v, Language::Java, builtin_rules());
    const auto* c = find_rule(cands, "R-IMPORT");
    REQUIRE(c);
    CHECK(c->code.rfind("package demo;\nimport java.util.", 0) == 0);
    CHECK(c->code.find("import java.util.Scanner;") < c->code.find("public class Main"));
    CHECK(c->code.find("import java.util.List;") != std::string::npos);
    CHECK(c->code.find("import java.util.ArrayList;") != std::string::npos);
  }

  TEST_CASE("import rule for python and c++") {
    const auto py = apply_rules("print(math.sqrt(4))\n", "", failed(Outcome::RuntimeError, "x",
                                "NameError: name 'math' is not defined\n"),
                                Language::Python, builtin_rules());
    REQUIRE(find_rule(py, "R-IMPORT"));
    CHECK(find_rule(py, "R-IMPORT")->code == "import math\nprint(math.sqrt(4))\n");
    const auto cpp = apply_rules("int main() { std::vector<int> v; }\n", "",
                                 failed(Outcome::CompilationError, "error: 'vector' is not a member of 'std'"),
                                 Language::Cpp, builtin_rules());
    REQUIRE(find_rule(cpp, "R-IMPORT"));
    CHECK(find_rule(cpp, "R-IMPORT")->code.rfind("#include <vector>\n", 0) == 0);
  }

  TEST_CASE("for-else rule") {
    const std::string code =
        "int main() {\n    for (int i = 0; i < 3; i++) {\n        if (i == 5) {\n            break;\n        }\n"
        "    }\n    else {\n        return 1;\n    }\n    return 0;\n}\n";
    const auto cands = apply_rules(code, "", failed(Outcome::CompilationError, "'else' without a previous 'if'"),
                                   Language::Cpp, builtin_rules());
    const auto* c = find_rule(cands, "R-FORELSE");
    REQUIRE(c);
    CHECK(c->code.find("bool forElseCompleted = true;") != std::string::npos);
    CHECK(c->code.find("{ forElseCompleted = false; break; }") != std::string::npos);
    CHECK(c->code.find("if (forElseCompleted) {") != std::string::npos);
    CHECK(c->code.find("else") == std::string::npos);

    const auto java = apply_rules("class A { void f() { for (;;) { break; } else { g(); } } }", "",
                                  failed(Outcome::CompilationError, "x"), Language::Java, builtin_rules());
    REQUIRE(find_rule(java, "R-FORELSE"));
    CHECK(find_rule(java, "R-FORELSE")->code.find("boolean forElseCompleted") != std::string::npos);
  }

  TEST_CASE("integer division rule") {
    const auto v = failed(Outcome::FunctionalError, "expected: 3\nactual: 3.5");
    const auto cands = apply_rules("a, b = map(int, input().split())\nprint(a/b)\n", "System.out.println(a / b);",
                                   v, Language::Python, builtin_rules(), Language::Java);
    REQUIRE(find_rule(cands, "R-INTDIV"));
    CHECK(find_rule(cands, "R-INTDIV")->code == "a, b = map(int, input().split())\nprint(a//b)\n");
    const auto from_python = apply_rules("a, b = map(int, input().split())\nprint(a/b)\n", "print(a/b)", v,
                                         Language::Python, builtin_rules(), Language::Python);
    CHECK_FALSE(find_rule(from_python, "R-INTDIV"));
  }

  TEST_CASE("input split rule") {
    const auto v = failed(Outcome::RuntimeError, "x",
                          "ValueError: invalid literal for int() with base 10: '3 4'\n");
    const auto cands = apply_rules("a = int(input())\nb = int(input())\nprint(a + b)\n", "", v, Language::Python,
                                   builtin_rules(), Language::Cpp);
    REQUIRE(find_rule(cands, "R-INPUTSPLIT"));
    CHECK(find_rule(cands, "R-INPUTSPLIT")->code == "a, b = map(int, input().split())\nprint(a + b)\n");
  }

  TEST_CASE("mutated bound rule") {
    const std::string code = "n = 3\nfor i in range(n):\n    if i == 0:\n        n += 1\n    print(i)\n";
    const auto cands = apply_rules(code, "", failed(Outcome::FunctionalError, "x"), Language::Python,
                                   builtin_rules(), Language::Java);
    REQUIRE(find_rule(cands, "R-MUTBOUND"));
    CHECK(find_rule(cands, "R-MUTBOUND")->code ==
          "n = 3\ni = 0\nwhile i < n:\n    if i == 0:\n        n += 1\n    print(i)\n    i += 1\n");
  }

  TEST_CASE("main class rule") {
    const auto cands = apply_rules("public class Solution {\n  public static void main(String[] a) {}\n}\n", "",
                                   failed(Outcome::CompilationError,
                                          "error: class Solution is public, should be declared in a file named Solution.java"),
                                   Language::Java, builtin_rules());
    REQUIRE(find_rule(cands, "R-MAINCLASS"));
    CHECK(find_rule(cands, "R-MAINCLASS")->code.find("public class Main {") == 0);
  }

  TEST_CASE("composition and preconditions") {
    const std::string code =
        "public class Main {\n  public static void main(String[] a) {\n    Scanner sc = new Scanner(System.in);\n"
        "    for (int i = 0; i < 2; i++) { break; } else { System.out.println(1); }\n  }\n}\n";
    const auto cands = apply_rules(code, "", failed(Outcome::CompilationError, "  symbol:   class Scanner\n"),
                                   Language::Java, builtin_rules());
    REQUIRE(cands.size() == 3);
    CHECK(cands[2].rule_id == "R-IMPORT+R-FORELSE");
    CHECK(cands[2].code.find("import java.util.Scanner;") != std::string::npos);
    CHECK(cands[2].code.find("if (forElseCompleted)") != std::string::npos);
    CHECK(apply_rules("print(1)\n", "", failed(Outcome::FunctionalError, "x"), Language::Python,
                      builtin_rules()).empty());
    CHECK_THROWS_AS(apply_rules("x", "", Verdict{}, Language::Python, builtin_rules()), Error);
  }

  TEST_CASE("edit distance and prompts") {
    CHECK(line_edit_distance("a\nb\nc", "a\nb\nc") == 0);
    CHECK(line_edit_distance("a\nb\nc", "a\nc") == 1);
    CHECK(line_edit_distance("", "x\ny") == 2);

    RepairRequest req;
    req.task = {"t", "p", Language::Java, Language::Python};
    req.source_code = "class A {}";
    req.code = "print(7/2)";
    req.verdict = failed(Outcome::FunctionalError, "expected: 3\nactual: 3.5");
    const auto with = repair_prompt(req, RepairEncoding::WithDiagnostic);
    CHECK(with.text.find("Java source:\nclass A {}\n") != std::string::npos);
    CHECK(with.text.find("Python translation:\nprint(7/2)\n") != std::string::npos);
    CHECK(with.text.find("Error (FunctionalError):\nexpected: 3\nactual: 3.5\n") != std::string::npos);
    CHECK(with.sentinel == std::string(kDefaultSentinel));
    const auto bare = repair_prompt(req, RepairEncoding::CodeOnly);
    CHECK(bare.text.find("class A") == std::string::npos);
    CHECK(bare.text.find("actual") == std::string::npos);
    CHECK(parse_encoding("code-only") == RepairEncoding::CodeOnly);
    CHECK(parse_encoding(to_string(RepairEncoding::WithDiagnostic)) == RepairEncoding::WithDiagnostic);
    CHECK_FALSE(parse_encoding("verbose"));
  }

  TEST_CASE("repair task with rules") {
    RepairRequest req;
    req.task = {"ceil", "ceil", Language::Java, Language::Python};
    req.source_code = "System.out.println((n + k - 1) / k);";
    req.code = "n, k = map(int, input().split())\nprint((n + k - 1) / k)\n";
    req.tests = {{"t1", "7 2\n", "4\n"}, {"t2", "10 5\n", "2\n"}};
    req.verdict = evaluate(req.code, Language::Python, req.tests, settings().limits, {}, *settings().toolchains);
    REQUIRE(req.verdict.outcome == Outcome::FunctionalError);
    const auto a = repair_task(req, {Corrector::rule_engine()}, settings());
    CHECK(a.success);
    CHECK(a.corrector == "R-INTDIV");
    CHECK(a.after.outcome == Outcome::Success);
    CHECK(a.before.outcome == Outcome::FunctionalError);
    CHECK(a.code_after.find("//") != std::string::npos);

    const auto back = attempt_from_json(attempt_to_json(a));
    CHECK(attempt_to_json(back) == attempt_to_json(a));

    CHECK_THROWS_AS(repair_task(req, {}, settings()), Error);
    auto zero = settings();
    zero.budget = 0;
    CHECK_THROWS_AS(repair_task(req, {Corrector::rule_engine()}, zero), Error);
  }

  TEST_CASE("model corrector partial fix records the transition") {
    RepairRequest req;
    req.task = {"t", "p", Language::Java, Language::Python};
    req.source_code = "class A {}";
    req.code = "print(1 +)\n";
    req.tests = {{"t1", "", "2\n"}};
    req.verdict = evaluate(req.code, Language::Python, req.tests, settings().limits, {}, *settings().toolchains);
    REQUIRE(req.verdict.outcome == Outcome::CompilationError);
    const auto a = repair_task(req, {Corrector::rule_engine(), Corrector::model(canned_model("print(1)"))},
                               settings());
    CHECK_FALSE(a.success);
    CHECK(a.corrector == "backend:canned");
    CHECK(a.after.outcome == Outcome::FunctionalError);
    CHECK(a.code_after == "print(1)");

    const auto fixed = repair_task(req, {Corrector::model(canned_model("print(2)"))}, settings());
    CHECK(fixed.success);

    BackendSpec broken;
    broken.name = "broken";
    broken.kind = BackendKind::Command;
    broken.endpoint_or_cmd = "exit 9";
    const auto err = repair_task(req, {Corrector::model(std::make_shared<Backend>(broken))}, settings());
    CHECK_FALSE(err.success);
    REQUIRE(err.errors.size() == 1);
    CHECK(err.errors[0].rfind("backend:broken: ", 0) == 0);
    CHECK(err.after.outcome == Outcome::CompilationError);
  }

  TEST_CASE("pair export gatekeeping") {
    ScratchDir tmp;
    const std::vector<TestCase> tests = {{"t1", "7\n", "3\n"}, {"t2", "8\n", "4\n"}};
    auto make_source = [&](const std::string& id) {
      PairSource s;
      s.task = {id, id, Language::Java, Language::Python};
      s.tests = tests;
      s.origin_backend = "fixture";
      s.attempt.task_id = id;
      s.attempt.code_before = "n = int(input())\nprint(n / 2)\n";
      s.attempt.before = evaluate(s.attempt.code_before, Language::Python, tests, settings().limits, {},
                                  *settings().toolchains);
      s.attempt.code_after = s.attempt.code_before;
      s.attempt.after = s.attempt.before;
      return s;
    };

    auto good = make_source("good");
    good.attempt.success = true;
    good.attempt.code_after = "n = int(input())\nprint(n // 2)\n";
    auto manual_ok = make_source("manual-ok");
    auto manual_bad = make_source("manual-bad");
    std::filesystem::create_directories(tmp.path() / "fixes/manual-ok");
    std::filesystem::create_directories(tmp.path() / "fixes/manual-bad");
    write_file_atomic(tmp.path() / "fixes/manual-ok/fixed.py", "n = int(input())\nprint(n >> 1)\n");
    write_file_atomic(tmp.path() / "fixes/manual-bad/fixed.py", "n = int(input())\nprint(round(n / 2))\n");
    auto lying = make_source("lying");
    lying.attempt.success = true;

    const auto out = tmp.path() / "pairs.jsonl";
    const auto r = export_pairs({good, manual_ok, manual_bad, lying}, tmp.path() / "fixes", out, settings().limits,
                                {}, *settings().toolchains);
    CHECK(r.count == 2);
    REQUIRE(r.rejected.size() == 2);
    for (const auto& msg : r.rejected) CHECK(msg.rfind("UnverifiedValidCode: ", 0) == 0);
    const auto lines = read_lines(out);
    REQUIRE(lines.size() == 2);
    for (const auto& line : lines) {
      const auto doc = nlohmann::json::parse(line);
      CHECK(doc.at("target_lang") == "python");
      CHECK(evaluate(doc.at("valid_code").get<std::string>(), Language::Python, tests, settings().limits, {},
                     *settings().toolchains).outcome == Outcome::Success);
      CHECK(evaluate(doc.at("invalid_code").get<std::string>(), Language::Python, tests, settings().limits, {},
                     *settings().toolchains).outcome != Outcome::Success);
    }

    const auto empty = export_pairs({}, std::nullopt, tmp.path() / "none.jsonl", settings().limits, {},
                                    *settings().toolchains);
    CHECK(empty.count == 0);
    CHECK(read_file(tmp.path() / "none.jsonl").empty());
  }
}
