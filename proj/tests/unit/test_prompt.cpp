#include <doctest.h>

#include <random>

#include "test_support.hpp"
#include "transjudge/code_scan.hpp"
#include "transjudge/error.hpp"
#include "transjudge/prompt.hpp"

using namespace transjudge;

TEST_SUITE("prompt") {
  TEST_CASE("chat template layout") {
    const auto p = render_prompt(default_chat_template(), "class A{}", Language::Java, Language::Python);
    CHECK(p.text == "class A{}\n\nTranslate the above Java code to Python.\n"
                    "Print only the Python code, end with \"|End-of-Code|\".\n");
    CHECK(p.template_family == TemplateFamily::ChatStyle);
    CHECK(p.sentinel == std::string(kDefaultSentinel));
  }

  TEST_CASE("completion template ends with the target cue") {
    const auto p = render_prompt(default_completion_template(), "int main() {}\n", Language::Cpp,
                                 Language::Java);
    CHECK(p.text.find("Translate the above C++ code to Java.") != std::string::npos);
    CHECK(p.text.substr(p.text.size() - 6) == "Java:\n");
    CHECK(p.text.find("|End-of-Code|") == std::string::npos);
    CHECK_FALSE(p.sentinel);
  }

  TEST_CASE("render preconditions") {
    CHECK_THROWS_AS(render_prompt(default_chat_template(), "x", Language::Java, Language::Java), Error);
    CHECK_THROWS_AS(render_prompt(default_chat_template(), "  \n", Language::Java, Language::Cpp), Error);
  }

  TEST_CASE("template invariants") {
    auto t = default_chat_template();
    t.task_description = "Translate to $TARGET_LANG.";
    CHECK_THROWS_AS(check_template(t), Error);
    t = default_chat_template();
    t.task_description = "From $SOURCE_LANG to $TARGET_LANG and $TARGET_LANG.";
    CHECK_THROWS_AS(check_template(t), Error);
    t = default_chat_template();
    t.indicator = "";
    CHECK_THROWS_AS(check_template(t), Error);
    t = default_chat_template();
    t.indicator = "Use $STYLE please.";
    CHECK_THROWS_AS(check_template(t), Error);
    auto c = default_completion_template();
    c.indicator = "";
    CHECK_NOTHROW(check_template(c));
  }

  TEST_CASE("template json round trip") {
    for (const auto& t : {default_chat_template(), default_completion_template()}) {
      const auto back = template_from_json(template_to_json(t));
      CHECK(back.family == t.family);
      CHECK(back.task_description == t.task_description);
      CHECK(back.indicator == t.indicator);
      CHECK(back.sentinel == t.sentinel);
    }
    CHECK_THROWS_AS(template_from_json({{"family", "poem"}}), Error);
  }

  TEST_CASE("extraction fixture cases") {
    const auto doc = nlohmann::json::parse(read_file(testsupport::fixtures() / "extraction_cases.json"));
    REQUIRE(doc.size() >= 15);
    for (const auto& c : doc) {
      CAPTURE(c.at("name").get<std::string>());
      std::optional<std::string> sentinel;
      if (!c.at("sentinel").is_null()) sentinel = c.at("sentinel").get<std::string>();
      const auto r = extract_code(c.at("raw").get<std::string>(),
                                  *parse_language(c.at("target").get<std::string>()), sentinel);
      CHECK(r.code == c.at("code").get<std::string>());
      CHECK(to_string(r.method) == c.at("method").get<std::string>());
      CHECK(r.warnings == c.at("warnings").get<std::vector<std::string>>());
    }
  }

  TEST_CASE("documented extraction examples") {
    auto r = extract_code("Here is the code:\n```python\nprint(1)\n```\nHope it helps", Language::Python,
                          std::nullopt);
    CHECK(r.code == "print(1)");
    CHECK(r.method == ExtractionMethod::FencedBlock);
    r = extract_code("print(1)\n|End-of-Code| extra chatter", Language::Python, "|End-of-Code|");
    CHECK(r.code == "print(1)");
    CHECK(r.method == ExtractionMethod::Sentinel);
    r = extract_code("Sorry, I am not able to help with that request today", Language::Java, std::nullopt);
    CHECK(r.method == ExtractionMethod::WholeCompletion);
    CHECK(r.warnings == std::vector<std::string>{"no code region detected"});
  }

  TEST_CASE("fence round trip over random bodies") {
    std::mt19937_64 rng(20240611);
    for (int i = 0; i < 300; ++i) {
      const std::string body = testsupport::random_code_body(rng);
      const std::string expected = scan::strip_blank_edges(body);
      if (scan::is_blank(expected)) continue;
      const std::string raw = "Here you go:\n```python\n" + body + "```\nThat is all.\n";
      const auto r = extract_code(raw, Language::Python, std::nullopt);
      CAPTURE(body);
      CHECK(r.code == expected);
      CHECK(r.method == ExtractionMethod::FencedBlock);
      const auto s = extract_code("```python\n" + body + "```\n|End-of-Code|", Language::Python, "|End-of-Code|");
      CHECK(s.code == expected);
    }
  }

  TEST_CASE("language detection") {
    CHECK(detect_language("#include <iostream>\nint main() { std::cout << 1; }") == Language::Cpp);
    CHECK(detect_language("public class Main { public static void main(String[] a) {} }") == Language::Java);
    CHECK(detect_language("def f(x):\n    return x\nimport sys\n") == Language::Python);
    CHECK_FALSE(detect_language("hello there"));
  }
}
