#include <doctest.h>

#include <algorithm>
#include <set>

#include "test_support.hpp"
#include "transjudge/corpus.hpp"
#include "transjudge/error.hpp"
#include "transjudge/exec.hpp"
#include "transjudge/io.hpp"

using namespace transjudge;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::ConfigError;
}

fs::path write_corpus(const fs::path& dir, const nlohmann::json& manifest) {
  write_file_atomic(dir / "a.py", "print(1)\n");
  write_file_atomic(dir / "b.cpp", "int main() {}\n");
  for (int i = 1; i <= 3; ++i) {
    write_file_atomic(dir / ("in_" + std::to_string(i) + ".txt"), "x\n");
    write_file_atomic(dir / ("out_" + std::to_string(i) + ".txt"), "y\n");
  }
  write_file_atomic(dir / "manifest.json", manifest.dump());
  return dir / "manifest.json";
}

nlohmann::json three_tests() {
  nlohmann::json tests = nlohmann::json::array();
  for (int i = 1; i <= 3; ++i) {
    tests.push_back({{"id", "t" + std::to_string(i)},
                     {"stdin_file", "in_" + std::to_string(i) + ".txt"},
                     {"expected_file", "out_" + std::to_string(i) + ".txt"}});
  }
  return tests;
}

nlohmann::json two_programs() {
  return {{"name", "demo"},
          {"programs",
           {{{"id", "p1"}, {"language", "python"}, {"code_file", "a.py"}, {"tests", three_tests()}},
            {{"id", "p2"}, {"language", "cpp"}, {"code_file", "b.cpp"}, {"tests", three_tests()}}}}};
}

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("manifest with two programs and three tests each") {
    ScratchDir tmp;
    const Corpus c = load_manifest(write_corpus(tmp.path(), two_programs()));
    CHECK(c.name == "demo");
    CHECK(c.programs.size() == 2);
    CHECK(c.test_count() == 6);
    CHECK(c.find("p2")->language == Language::Cpp);
    CHECK(c.find("p1")->tests[2].expected_stdout == "y\n");
    CHECK(c.find("missing") == nullptr);
    CHECK(validate_corpus(c).ok);
    CHECK(validate_corpus(c).findings.empty());
  }

  TEST_CASE("missing referenced file names the path") {
    ScratchDir tmp;
    auto m = two_programs();
    m["programs"][0]["tests"][2]["stdin_file"] = "tests/in_3.txt";
    const auto path = write_corpus(tmp.path(), m);
    try {
      load_manifest(path);
      FAIL("expected MissingFile");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MissingFile);
      CHECK(std::string(e.what()).find("tests/in_3.txt") != std::string::npos);
    }
  }

  TEST_CASE("malformed manifests") {
    ScratchDir tmp;
    auto dup = two_programs();
    dup["programs"][1]["id"] = "p1";
    CHECK(code_of([&] { load_manifest(write_corpus(tmp.path(), dup)); }) == ErrorCode::DuplicateId);

    auto lang = two_programs();
    lang["programs"][0]["language"] = "ruby";
    CHECK(code_of([&] { load_manifest(write_corpus(tmp.path(), lang)); }) ==
          ErrorCode::MalformedManifest);

    auto total = two_programs();
    total["testcase_total"] = 7;
    CHECK(code_of([&] { load_manifest(write_corpus(tmp.path(), total)); }) ==
          ErrorCode::MalformedManifest);
    total["testcase_total"] = 6;
    CHECK(load_manifest(write_corpus(tmp.path(), total)).test_count() == 6);

    write_file_atomic(tmp.path() / "broken.json", "{not json");
    CHECK(code_of([&] { load_manifest(tmp.path() / "broken.json"); }) == ErrorCode::MalformedManifest);
    CHECK(code_of([&] { load_manifest(tmp.path() / "absent.json"); }) == ErrorCode::MissingFile);
  }

  TEST_CASE("validation findings") {
    Corpus c;
    c.name = "v";
    c.programs.push_back({"empty-tests", Language::Python, "print(1)\n", {}});
    c.programs.push_back({"dup", Language::Python, "print(1)\n", {{"t1", "", ""}, {"t1", "", ""}}});
    c.programs.push_back({"blank", Language::Python, "  \n", {{"t1", "", ""}}});
    c.programs.push_back({"latin1", Language::Python, "print('\xe9')\n", {{"t1", "", ""}}});
    const auto report = validate_corpus(c);
    CHECK_FALSE(report.ok);
    auto has = [&](const std::string& id, const std::string& kind) {
      return std::any_of(report.findings.begin(), report.findings.end(),
                         [&](const auto& f) { return f.program_id == id && f.kind == kind; });
    };
    CHECK(has("empty-tests", "empty test list"));
    CHECK(has("dup", "duplicate test id"));
    CHECK(has("blank", "empty code"));
    CHECK(has("latin1", "non-UTF-8 code"));
  }

  TEST_CASE("utf-8 validation") {
    CHECK(is_valid_utf8("plain"));
    CHECK(is_valid_utf8("caf\xc3\xa9"));
    CHECK_FALSE(is_valid_utf8("\xc3"));
    CHECK_FALSE(is_valid_utf8("\xed\xa0\x80"));  // surrogate
    CHECK_FALSE(is_valid_utf8("\xc0\xaf"));      // overlong
  }

  TEST_CASE("task enumeration") {
    Corpus c;
    c.name = "codenet";
    for (Language l : kAllLanguages) {
      for (int i = 0; i < 200; ++i) {
        c.programs.push_back({std::string(to_id(l)) + std::to_string(i), l, "x", {{"t", "", ""}}});
      }
    }
    CHECK(enumerate_tasks(c, default_targets()).size() == 1200);

    Corpus avatar;
    avatar.name = "avatar";
    for (int i = 0; i < 249; ++i) avatar.programs.push_back({"j" + std::to_string(i), Language::Java, "x", {}});
    for (int i = 0; i < 250; ++i) avatar.programs.push_back({"p" + std::to_string(i), Language::Python, "x", {}});
    CHECK(enumerate_tasks(avatar, default_targets()).size() == 998);

    Corpus one;
    one.name = "one";
    one.programs.push_back({"only", Language::Java, "x", {}});
    const auto tasks = enumerate_tasks(one, {{Language::Java, {Language::Python}}});
    REQUIRE(tasks.size() == 1);
    CHECK(tasks[0].task_id == make_task_id("one", "only", Language::Java, Language::Python));
    CHECK(tasks[0].target_lang == Language::Python);

    CHECK(code_of([&] { enumerate_tasks(one, {{Language::Java, {Language::Java}}}); }) ==
          ErrorCode::InvalidTargetMap);
  }

  TEST_CASE("task ids are stable and filesystem safe") {
    const auto id = make_task_id("my corpus", "p/1", Language::Cpp, Language::Java);
    CHECK(id == "my_corpus__p_1__cpp-java");
    CHECK(id == make_task_id("my corpus", "p/1", Language::Cpp, Language::Java));
  }

  TEST_CASE("split sizes and determinism") {
    std::vector<std::string> ids;
    for (int i = 0; i < 100; ++i) ids.push_back("id" + std::to_string(i));
    const auto a = split_tasks(ids, {0.8, 0.1, 0.1}, 7);
    CHECK(a.train.size() == 80);
    CHECK(a.valid.size() == 10);
    CHECK(a.test.size() == 10);
    const auto b = split_tasks(ids, {0.8, 0.1, 0.1}, 7);
    CHECK(split_to_json(a) == split_to_json(b));
    CHECK(split_to_json(a) != split_to_json(split_tasks(ids, {0.8, 0.1, 0.1}, 8)));

    const auto single = split_tasks({"x"}, {0.8, 0.1, 0.1}, 0);
    CHECK(single.train.empty());
    CHECK(single.valid.empty());
    CHECK(single.test == std::vector<std::string>{"x"});
  }

  TEST_CASE("split rejects bad ratios") {
    CHECK(code_of([] { split_tasks({"a"}, {0.5, 0.1, 0.1}, 0); }) == ErrorCode::BadRatios);
    CHECK(code_of([] { split_tasks({"a"}, {1.2, -0.1, -0.1}, 0); }) == ErrorCode::BadRatios);
  }

  TEST_CASE("language spellings") {
    CHECK(parse_language("C++") == Language::Cpp);
    CHECK(parse_language("PY") == Language::Python);
    CHECK(parse_language("java") == Language::Java);
    CHECK_FALSE(parse_language("rust"));
    CHECK(display_name(Language::Cpp) == "C++");
    CHECK(to_id(Language::Python) == "python");
  }

  TEST_CASE("bundled fixture corpora load cleanly") {
    for (const char* name : {"mini", "cases"}) {
      const Corpus c = load_manifest(testsupport::fixtures() / name / "manifest.json");
      CHECK(c.name == name);
      CHECK(validate_corpus(c).ok);
    }
  }
}
