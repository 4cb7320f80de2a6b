#include <doctest.h>

#include <random>

#include "test_support.hpp"
#include "transjudge/error.hpp"
#include "transjudge/io.hpp"
#include "transjudge/report.hpp"

using namespace transjudge;
using testsupport::make_records;
using testsupport::make_repairs;

TEST_SUITE("report") {
  TEST_CASE("percent rounds half up to one decimal") {
    CHECK(percent(170, 200) == "85.0");
    CHECK(percent(95, 250) == "38.0");
    CHECK(percent(22, 90) == "24.4");
    CHECK(percent(35, 81) == "43.2");
    CHECK(percent(1, 8) == "12.5");
    CHECK(percent(1, 16) == "6.3");
    CHECK(percent(0, 5) == "0.0");
    CHECK(percent(5, 5) == "100.0");
    CHECK(percent_tenths(2, 3) == 667);
    CHECK_THROWS_AS(percent(1, 0), Error);
  }

  TEST_CASE("success cells") {
    const auto cell = success_cell(make_records("codenet", Language::Cpp, Language::Java, "m", {170, 30, 0, 0, 0}));
    CHECK(cell.rate == "85.0%");
    CHECK(cell.successes == 170);
    CHECK(cell.total == 200);
    CHECK(success_cell(make_records("d", Language::Cpp, Language::Java, "m", {0, 200, 0, 0, 0})).rate == "0.0%");
    CHECK_THROWS_AS(success_cell({}), Error);
  }

  TEST_CASE("breakdown cells") {
    const auto cell = breakdown_cell(make_records("codenet", Language::Cpp, Language::Java, "m", {0, 247, 69, 44, 2}));
    CHECK(cell.failures == 362);
    CHECK(cell.shares[0] == "68.2%");
    CHECK(cell.shares[1] == "19.1%");
    CHECK(cell.shares[2] == "12.2%");
    CHECK(cell.shares[3] == "0.6%");
    const auto all_nt = breakdown_cell(make_records("d", Language::Cpp, Language::Java, "m", {5, 0, 0, 0, 3}));
    CHECK(all_nt.shares == std::array<std::string, 4>{"0.0%", "0.0%", "0.0%", "100.0%"});
    CHECK_THROWS_AS(breakdown_cell(make_records("d", Language::Cpp, Language::Java, "m", {4, 0, 0, 0, 0})), Error);
  }

  TEST_CASE("repair cells") {
    CHECK(repair_cell(90, 22) == "90/22 (24.4%)");
    CHECK(repair_cell(81, 35) == "81/35 (43.2%)");
    CHECK(repair_cell(10, 0) == "10/0 (0.0%)");
    CHECK_THROWS_AS(repair_cell(0, 0), Error);
  }

  TEST_CASE("breakdown shares stay within rounding of 100") {
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> count(0, 60);
    for (int i = 0; i < 500; ++i) {
      std::array<int, 5> c{0, count(rng), count(rng), count(rng), count(rng)};
      if (c[1] + c[2] + c[3] + c[4] == 0) c[1] = 1;
      const auto cell = breakdown_cell(make_records("d", Language::Java, Language::Cpp, "m", c));
      std::int64_t sum = 0;
      for (std::size_t k = 0; k < 4; ++k) sum += percent_tenths(cell.counts[k], cell.failures);
      CHECK(std::abs(sum - 1000) <= 2);
    }
  }

  TEST_CASE("tables group and pool") {
    auto records = make_records("codenet", Language::Cpp, Language::Java, "a", {170, 20, 5, 4, 1});
    const auto b = make_records("codenet", Language::Cpp, Language::Java, "b", {150, 30, 10, 10, 0});
    records.insert(records.end(), b.begin(), b.end());
    const auto success = success_table(records);
    REQUIRE(success.rows.size() == 2);
    CHECK(success.rows[0] == std::vector<std::string>{"codenet", "C++", "Java", "a", "170", "200", "85.0%"});
    CHECK(success.data[0].at("rate") == 85.0);

    const auto breakdown = error_breakdown(records);
    REQUIRE(breakdown.rows.size() == 3);
    CHECK(breakdown.rows[0][3] == "(pooled)");
    CHECK(breakdown.rows[0][4] == "80");

    auto repairs = make_repairs("codenet", Language::Python, Language::Java, "rules", 90, 22);
    CHECK(repair_table(repairs).rows.at(0).back() == "90/22 (24.4%)");
    CHECK(repair_table(repairs).columns.back() == "Invalid/Repaired (Rate)");
  }

  TEST_CASE("category table") {
    auto records = make_records("d", Language::Cpp, Language::Java, "m", {0, 3, 0, 1, 0});
    records[0].category = ErrorCategory::DependencyError;
    records[1].category = ErrorCategory::DependencyError;
    records[2].category = ErrorCategory::SyntacticDifference;
    const auto t = category_table(records);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.columns.size() == 2 + kAllCategories.size());
    CHECK(t.rows[1][1] == "3");
    CHECK(t.rows[1][2] == "33.3%");
    CHECK(t.rows[1][4] == "66.7%");
  }

  TEST_CASE("transition matrix") {
    CHECK(transition_matrix({}).total() == 0);
    ResultRecord r;
    r.phase = "repair";
    r.before_outcome = Outcome::CompilationError;
    r.outcome = Outcome::FunctionalError;
    const auto one = transition_matrix({r});
    CHECK(one.total() == 1);
    CHECK(one.counts[outcome_index(Outcome::CompilationError)][outcome_index(Outcome::FunctionalError)] == 1);

    // 27 of 200 compilation errors fixed: 13.5%.
    std::vector<ResultRecord> batch;
    for (int i = 0; i < 200; ++i) {
      ResultRecord x = r;
      x.outcome = i < 27 ? Outcome::Success : Outcome::CompilationError;
      batch.push_back(x);
    }
    const auto m = transition_matrix(batch);
    CHECK(m.fix_rate(Outcome::CompilationError) == "13.5%");
    CHECK_FALSE(m.fix_rate(Outcome::RuntimeError));
    const auto t = transition_table(m);
    CHECK(t.rows[1].back() == "13.5%");
    CHECK(t.rows[2].back() == "-");
  }

  TEST_CASE("rendering") {
    const auto t = success_table(make_records("codenet", Language::Cpp, Language::Java, "a,b", {1, 1, 0, 0, 0}));
    const auto md = render(t, ReportFormat::Markdown);
    CHECK(md.find("| Dataset | Source | Target |") != std::string::npos);
    CHECK(md.find("| --- |") != std::string::npos);
    const auto csv = render(t, ReportFormat::Csv);
    CHECK(csv.rfind("Dataset,Source,Target,Backend,Success,Total,Rate\n", 0) == 0);
    CHECK(csv.find("\"a,b\"") != std::string::npos);
    const auto js = nlohmann::json::parse(render(t, ReportFormat::Json));
    CHECK(js.at("name") == "success");
    CHECK(js.at("rows").size() == 1);
    CHECK(parse_format("markdown") == ReportFormat::Markdown);
    CHECK_FALSE(parse_format("xlsx"));

    ScratchDir tmp;
    emit(t, ReportFormat::Markdown, tmp.path() / "a.md");
    emit(t, ReportFormat::Markdown, tmp.path() / "b.md");
    CHECK(read_file(tmp.path() / "a.md") == read_file(tmp.path() / "b.md"));
  }

  TEST_CASE("records and canonical logs") {
    ResultRecord r = make_records("d", Language::Java, Language::Python, "m", {0, 0, 0, 1, 0})[0];
    r.category = ErrorCategory::LogicError;
    r.timestamp = "2026-01-01T10:00:00Z";
    const auto back = record_from_json(record_to_json(r));
    CHECK(record_to_json(back) == record_to_json(r));
    const std::string a = record_to_json(r).dump() + "\n";
    r.timestamp = "2027-05-05T00:00:00Z";
    r.task_id = "aaa";
    const std::string b = record_to_json(r).dump() + "\n";
    CHECK(canonicalize_log(a + b) == canonicalize_log(b + a));
    CHECK(canonicalize_log(a).find("2026") == std::string::npos);
  }
}
