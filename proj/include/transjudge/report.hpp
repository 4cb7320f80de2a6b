#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "transjudge/exec.hpp"
#include "transjudge/taxonomy.hpp"

namespace transjudge {

struct ResultRecord {
  std::string task_id;
  std::string backend;
  std::string dataset;
  Language source_lang = Language::Cpp;
  Language target_lang = Language::Java;
  std::string phase = "translate";  // "translate" or "repair"
  Outcome outcome = Outcome::Success;
  int tests_passed = 0;
  int tests_total = 0;
  std::optional<ErrorCategory> category;
  std::optional<std::string> corrector;
  std::optional<Outcome> before_outcome;
  std::string timestamp;
};

nlohmann::json record_to_json(const ResultRecord& r);
ResultRecord record_from_json(const nlohmann::json& doc);

std::vector<ResultRecord> read_records(const std::filesystem::path& path);

inline constexpr std::string_view kCanonicalTimestamp = "1970-01-01T00:00:00Z";

/// Zeroes timestamps and sorts lines, so two runs can be compared byte for byte.
std::string canonicalize_log(std::string_view jsonl);

/// 100 * num / den rounded half-up to one decimal, without a percent sign.
std::string percent(std::int64_t num, std::int64_t den);
/// Same value in tenths of a percent.
std::int64_t percent_tenths(std::int64_t num, std::int64_t den);

struct Table {
  std::string name;
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  nlohmann::json data = nlohmann::json::array();  // per-row numeric values
};

struct SuccessCell {
  std::int64_t successes = 0;
  std::int64_t total = 0;
  std::string rate;  // "85.0%"
};

/// Throws Error(EmptyGroup) for an empty group.
SuccessCell success_cell(const std::vector<ResultRecord>& group);

struct BreakdownCell {
  std::int64_t failures = 0;
  std::array<std::int64_t, 4> counts{};  // compilation, runtime, functional, non-terminating
  std::array<std::string, 4> shares;     // "68.2%"
};

inline constexpr std::array<Outcome, 4> kFailureOutcomes = {
    Outcome::CompilationError, Outcome::RuntimeError, Outcome::FunctionalError,
    Outcome::NonTerminating};

/// Throws Error(EmptyGroup) when the group has no failed record.
BreakdownCell breakdown_cell(const std::vector<ResultRecord>& group);

/// "90/22 (24.4%)": invalid, repaired, rate. Throws Error(EmptyGroup) when invalid is 0.
std::string repair_cell(std::int64_t invalid, std::int64_t repaired);

/// Translate-phase records grouped by (dataset, source, target, backend).
Table success_table(const std::vector<ResultRecord>& records);
/// Same grouping over failures, plus a pooled row per (dataset, source, target).
Table error_breakdown(const std::vector<ResultRecord>& records);
/// Category shares per backend plus a pooled row; records without a category are skipped.
Table category_table(const std::vector<ResultRecord>& records);
/// Repair-phase records grouped by (dataset, source, target, corrector).
Table repair_table(const std::vector<ResultRecord>& records);

struct TransitionMatrix {
  // Indexed in kAllOutcomes order: [before][after].
  std::array<std::array<std::int64_t, 5>, 5> counts{};

  std::int64_t row_sum(Outcome before) const;
  std::int64_t total() const;
  /// Share of `before` rows ending in Success, or nullopt for an empty row.
  std::optional<std::string> fix_rate(Outcome before) const;
};

std::size_t outcome_index(Outcome outcome);

TransitionMatrix transition_matrix(const std::vector<ResultRecord>& repair_records);
Table transition_table(const TransitionMatrix& matrix);

enum class ReportFormat { Markdown, Csv, Json };

std::optional<ReportFormat> parse_format(std::string_view text);
std::string_view file_extension(ReportFormat format);

std::string render(const Table& table, ReportFormat format);
/// Writes render(table, format) atomically.
void emit(const Table& table, ReportFormat format, const std::filesystem::path& path);

}  // namespace transjudge
