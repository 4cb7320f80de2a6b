#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "transjudge/exec.hpp"
#include "transjudge/language.hpp"

namespace transjudge {

enum class ErrorCategory {
  SyntacticDifference,
  SemanticDifference,
  DependencyError,
  LogicError,
  DataRelatedError,
  ModelSpecificError,
  Other
};

inline constexpr std::array<ErrorCategory, 7> kAllCategories = {
    ErrorCategory::SyntacticDifference, ErrorCategory::SemanticDifference,
    ErrorCategory::DependencyError,     ErrorCategory::LogicError,
    ErrorCategory::DataRelatedError,    ErrorCategory::ModelSpecificError,
    ErrorCategory::Other};

std::string_view to_string(ErrorCategory category);
std::optional<ErrorCategory> parse_category(std::string_view text);

enum class LabelSource { Heuristic, Manual };

std::string_view to_string(LabelSource source);

struct CategoryLabel {
  std::string task_id;
  ErrorCategory category = ErrorCategory::Other;
  LabelSource source = LabelSource::Heuristic;
  std::string evidence;  // "<rule version>/<rule>: <excerpt>"

  friend bool operator==(const CategoryLabel&, const CategoryLabel&) = default;
};

inline constexpr std::string_view kRuleVersion = "v1";

struct ClassifyOptions {
  double duplicate_threshold = 0.5;
};

/// Heuristic label for a failed translation; first matching rule wins.
/// `source_lang` falls back to detection on `source_code` when not given.
CategoryLabel classify(const std::string& task_id, const Verdict& verdict,
                       std::string_view translated_code, std::string_view source_code,
                       Language target, std::optional<Language> source_lang = std::nullopt,
                       const ClassifyOptions& options = {});

/// Unresolved names reported by compilers and interpreters in `diagnostic`.
std::vector<std::string> unresolved_symbols(std::string_view diagnostic);

/// Compile log, first-failure diagnostic and failed-run stderr, concatenated.
std::string diagnostic_text(const Verdict& verdict);

std::map<ErrorCategory, double> distribution(const std::vector<CategoryLabel>& labels);

struct MergeResult {
  std::vector<CategoryLabel> labels;
  std::vector<std::string> warnings;
};

/// CSV `task_id,category`; manual labels replace heuristic ones, labels for
/// task ids outside `heuristic` are dropped with a warning.
MergeResult merge_labels(const std::vector<CategoryLabel>& heuristic,
                         const std::optional<std::filesystem::path>& manual_file);

}  // namespace transjudge
