#include "transjudge/report.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <tuple>

#include "transjudge/code_scan.hpp"
#include "transjudge/error.hpp"
#include "transjudge/io.hpp"

namespace transjudge {

using nlohmann::json;

namespace {

json opt_str(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

}  // namespace

json record_to_json(const ResultRecord& r) {
  json doc;
  doc["task_id"] = r.task_id;
  doc["backend"] = r.backend;
  doc["dataset"] = r.dataset;
  doc["source_lang"] = std::string(to_id(r.source_lang));
  doc["target_lang"] = std::string(to_id(r.target_lang));
  doc["phase"] = r.phase;
  doc["outcome"] = std::string(to_string(r.outcome));
  doc["tests_passed"] = r.tests_passed;
  doc["tests_total"] = r.tests_total;
  doc["category"] = r.category ? json(std::string(to_string(*r.category))) : json(nullptr);
  doc["corrector"] = opt_str(r.corrector);
  doc["before_outcome"] =
      r.before_outcome ? json(std::string(to_string(*r.before_outcome))) : json(nullptr);
  doc["timestamp"] = r.timestamp;
  return doc;
}

ResultRecord record_from_json(const json& doc) {
  auto lang = [&](const char* key) {
    auto l = parse_language(doc.at(key).get<std::string>());
    if (!l) fail(ErrorCode::ConfigError, std::string("bad ") + key + " in result record");
    return *l;
  };
  auto outcome = [](const json& v) {
    auto o = parse_outcome(v.get<std::string>());
    if (!o) fail(ErrorCode::ConfigError, "bad outcome in result record: " + v.get<std::string>());
    return *o;
  };
  ResultRecord r;
  r.task_id = doc.at("task_id").get<std::string>();
  r.backend = doc.at("backend").get<std::string>();
  r.dataset = doc.value("dataset", std::string());
  r.source_lang = lang("source_lang");
  r.target_lang = lang("target_lang");
  r.phase = doc.value("phase", std::string("translate"));
  r.outcome = outcome(doc.at("outcome"));
  r.tests_passed = doc.value("tests_passed", 0);
  r.tests_total = doc.value("tests_total", 0);
  if (doc.contains("category") && !doc["category"].is_null()) {
    r.category = parse_category(doc["category"].get<std::string>());
  }
  if (doc.contains("corrector") && !doc["corrector"].is_null()) {
    r.corrector = doc["corrector"].get<std::string>();
  }
  if (doc.contains("before_outcome") && !doc["before_outcome"].is_null()) {
    r.before_outcome = outcome(doc["before_outcome"]);
  }
  r.timestamp = doc.value("timestamp", std::string());
  return r;
}

std::vector<ResultRecord> read_records(const std::filesystem::path& path) {
  std::vector<ResultRecord> out;
  for (const auto& line : read_lines(path)) {
    try {
      out.push_back(record_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      fail(ErrorCode::ConfigError, path.string() + ": " + e.what());
    }
  }
  return out;
}

std::string canonicalize_log(std::string_view jsonl) {
  std::vector<std::string> lines;
  for (const auto& raw : scan::split_lines(jsonl)) {
    if (scan::is_blank(raw)) continue;
    json doc = json::parse(raw);
    if (doc.contains("timestamp")) doc["timestamp"] = std::string(kCanonicalTimestamp);
    lines.push_back(doc.dump());
  }
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

std::int64_t percent_tenths(std::int64_t num, std::int64_t den) {
  if (den <= 0) fail(ErrorCode::EmptyGroup, "percentage of an empty group");
  return (2000 * num + den) / (2 * den);
}

std::string percent(std::int64_t num, std::int64_t den) {
  const std::int64_t t = percent_tenths(num, den);
  return std::to_string(t / 10) + "." + std::to_string(t % 10);
}

SuccessCell success_cell(const std::vector<ResultRecord>& group) {
  if (group.empty()) fail(ErrorCode::EmptyGroup, "success rate of an empty group");
  SuccessCell cell;
  cell.total = static_cast<std::int64_t>(group.size());
  cell.successes = std::count_if(group.begin(), group.end(),
                                 [](const ResultRecord& r) { return r.outcome == Outcome::Success; });
  cell.rate = percent(cell.successes, cell.total) + "%";
  return cell;
}

BreakdownCell breakdown_cell(const std::vector<ResultRecord>& group) {
  BreakdownCell cell;
  for (const auto& r : group) {
    if (r.outcome == Outcome::Success) continue;
    ++cell.failures;
    for (std::size_t i = 0; i < kFailureOutcomes.size(); ++i) {
      if (r.outcome == kFailureOutcomes[i]) ++cell.counts[i];
    }
  }
  if (cell.failures == 0) fail(ErrorCode::EmptyGroup, "no failed translations in group");
  for (std::size_t i = 0; i < 4; ++i) cell.shares[i] = percent(cell.counts[i], cell.failures) + "%";
  return cell;
}

std::string repair_cell(std::int64_t invalid, std::int64_t repaired) {
  if (invalid <= 0) fail(ErrorCode::EmptyGroup, "no invalid translations in group");
  return std::to_string(invalid) + "/" + std::to_string(repaired) + " (" + percent(repaired, invalid) + "%)";
}

namespace {

using GroupKey = std::tuple<std::string, std::string, std::string, std::string>;

GroupKey key_of(const ResultRecord& r, const std::string& last) {
  return {r.dataset, std::string(display_name(r.source_lang)), std::string(display_name(r.target_lang)),
          last};
}

double tenths_value(std::int64_t num, std::int64_t den) {
  return static_cast<double>(percent_tenths(num, den)) / 10.0;
}

const std::string kPooled = "(pooled)";

}  // namespace

Table success_table(const std::vector<ResultRecord>& records) {
  std::map<GroupKey, std::vector<ResultRecord>> groups;
  for (const auto& r : records) {
    if (r.phase == "translate") groups[key_of(r, r.backend)].push_back(r);
  }
  Table t{"success", "Translation success rate",
          {"Dataset", "Source", "Target", "Backend", "Success", "Total", "Rate"}, {}, json::array()};
  for (const auto& [key, group] : groups) {
    const auto cell = success_cell(group);
    const auto& [dataset, src, dst, backend] = key;
    t.rows.push_back({dataset, src, dst, backend, std::to_string(cell.successes),
                      std::to_string(cell.total), cell.rate});
    t.data.push_back({{"dataset", dataset}, {"source", src}, {"target", dst}, {"backend", backend},
                      {"success", cell.successes}, {"total", cell.total},
                      {"rate", tenths_value(cell.successes, cell.total)}});
  }
  return t;
}

Table error_breakdown(const std::vector<ResultRecord>& records) {
  std::map<GroupKey, std::vector<ResultRecord>> groups;
  for (const auto& r : records) {
    if (r.phase != "translate" || r.outcome == Outcome::Success) continue;
    groups[key_of(r, r.backend)].push_back(r);
    groups[key_of(r, kPooled)].push_back(r);
  }
  Table t{"breakdown",
          "Unsuccessful translations by outcome",
          {"Dataset", "Source", "Target", "Backend", "Failures", "Compilation Error",
           "Runtime Error", "Functional Error", "Non-terminating Execution"},
          {},
          json::array()};
  for (const auto& [key, group] : groups) {
    const auto cell = breakdown_cell(group);
    const auto& [dataset, src, dst, backend] = key;
    std::vector<std::string> row{dataset, src, dst, backend, std::to_string(cell.failures)};
    json data{{"dataset", dataset}, {"source", src}, {"target", dst}, {"backend", backend},
              {"failures", cell.failures}};
    for (std::size_t i = 0; i < 4; ++i) {
      row.push_back(cell.shares[i]);
      const std::string name(to_string(kFailureOutcomes[i]));
      data[name] = cell.counts[i];
      data[name + "_pct"] = tenths_value(cell.counts[i], cell.failures);
    }
    t.rows.push_back(std::move(row));
    t.data.push_back(std::move(data));
  }
  return t;
}

Table category_table(const std::vector<ResultRecord>& records) {
  std::map<std::string, std::vector<ErrorCategory>> groups;
  for (const auto& r : records) {
    if (r.phase != "translate" || !r.category) continue;
    groups[r.backend].push_back(*r.category);
    groups[kPooled].push_back(*r.category);
  }
  Table t{"category", "Root-cause categories of failed translations", {"Backend", "Labels"}, {},
          json::array()};
  for (ErrorCategory c : kAllCategories) t.columns.emplace_back(to_string(c));
  for (const auto& [backend, cats] : groups) {
    std::vector<std::string> row{backend, std::to_string(cats.size())};
    json data{{"backend", backend}, {"labels", cats.size()}};
    for (ErrorCategory c : kAllCategories) {
      const auto n = std::count(cats.begin(), cats.end(), c);
      const auto total = static_cast<std::int64_t>(cats.size());
      row.push_back(percent(n, total) + "%");
      data[std::string(to_string(c))] = n;
      data[std::string(to_string(c)) + "_pct"] = tenths_value(n, total);
    }
    t.rows.push_back(std::move(row));
    t.data.push_back(std::move(data));
  }
  return t;
}

Table repair_table(const std::vector<ResultRecord>& records) {
  std::map<GroupKey, std::pair<std::int64_t, std::int64_t>> groups;
  for (const auto& r : records) {
    if (r.phase != "repair") continue;
    auto& g = groups[key_of(r, r.corrector.value_or(r.backend))];
    ++g.first;
    if (r.outcome == Outcome::Success) ++g.second;
  }
  Table t{"repair",
          "Repair of invalid translations",
          {"Dataset", "Source", "Target", "Corrector", "Invalid/Repaired (Rate)"},
          {},
          json::array()};
  for (const auto& [key, counts] : groups) {
    const auto& [dataset, src, dst, backend] = key;
    t.rows.push_back({dataset, src, dst, backend, repair_cell(counts.first, counts.second)});
    t.data.push_back({{"dataset", dataset}, {"source", src}, {"target", dst}, {"corrector", backend},
                      {"invalid", counts.first}, {"repaired", counts.second},
                      {"rate", tenths_value(counts.second, counts.first)}});
  }
  return t;
}

std::size_t outcome_index(Outcome outcome) {
  for (std::size_t i = 0; i < kAllOutcomes.size(); ++i) {
    if (kAllOutcomes[i] == outcome) return i;
  }
  return 0;
}

std::int64_t TransitionMatrix::row_sum(Outcome before) const {
  std::int64_t s = 0;
  for (auto v : counts[outcome_index(before)]) s += v;
  return s;
}

std::int64_t TransitionMatrix::total() const {
  std::int64_t s = 0;
  for (Outcome o : kAllOutcomes) s += row_sum(o);
  return s;
}

std::optional<std::string> TransitionMatrix::fix_rate(Outcome before) const {
  const auto n = row_sum(before);
  if (n == 0) return std::nullopt;
  return percent(counts[outcome_index(before)][outcome_index(Outcome::Success)], n) + "%";
}

TransitionMatrix transition_matrix(const std::vector<ResultRecord>& repair_records) {
  TransitionMatrix m;
  for (const auto& r : repair_records) {
    if (r.phase != "repair" || !r.before_outcome) continue;
    ++m.counts[outcome_index(*r.before_outcome)][outcome_index(r.outcome)];
  }
  return m;
}

Table transition_table(const TransitionMatrix& matrix) {
  Table t{"transitions", "Outcome before and after repair", {"Before"}, {}, json::array()};
  for (Outcome o : kAllOutcomes) t.columns.emplace_back(to_string(o));
  t.columns.emplace_back("Fix rate");
  for (Outcome before : kAllOutcomes) {
    std::vector<std::string> row{std::string(to_string(before))};
    json data{{"before", std::string(to_string(before))}};
    for (Outcome after : kAllOutcomes) {
      const auto n = matrix.counts[outcome_index(before)][outcome_index(after)];
      row.push_back(std::to_string(n));
      data[std::string(to_string(after))] = n;
    }
    auto rate = matrix.fix_rate(before);
    row.push_back(rate.value_or("-"));
    data["fix_rate"] = rate ? json(tenths_value(matrix.counts[outcome_index(before)][0],
                                                matrix.row_sum(before)))
                            : json(nullptr);
    t.rows.push_back(std::move(row));
    t.data.push_back(std::move(data));
  }
  return t;
}

std::optional<ReportFormat> parse_format(std::string_view text) {
  if (text == "md" || text == "markdown") return ReportFormat::Markdown;
  if (text == "csv") return ReportFormat::Csv;
  if (text == "json") return ReportFormat::Json;
  return std::nullopt;
}

std::string_view file_extension(ReportFormat format) {
  switch (format) {
    case ReportFormat::Markdown: return "md";
    case ReportFormat::Csv: return "csv";
    case ReportFormat::Json: return "json";
  }
  return "txt";
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string md_row(const std::vector<std::string>& cells) {
  std::string out = "|";
  for (const auto& c : cells) out += " " + c + " |";
  return out + "\n";
}

}  // namespace

std::string render(const Table& table, ReportFormat format) {
  std::ostringstream out;
  switch (format) {
    case ReportFormat::Markdown: {
      out << "## " << table.title << "\n\n" << md_row(table.columns);
      out << md_row(std::vector<std::string>(table.columns.size(), "---"));
      for (const auto& row : table.rows) out << md_row(row);
      break;
    }
    case ReportFormat::Csv: {
      auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << csv_field(cells[i]);
        out << "\n";
      };
      line(table.columns);
      for (const auto& row : table.rows) line(row);
      break;
    }
    case ReportFormat::Json: {
      json doc{{"name", table.name}, {"title", table.title}, {"columns", table.columns},
               {"rows", table.rows}, {"data", table.data}};
      out << doc.dump(2) << "\n";
      break;
    }
  }
  return out.str();
}

void emit(const Table& table, ReportFormat format, const std::filesystem::path& path) {
  write_file_atomic(path, render(table, format));
}

}  // namespace transjudge
