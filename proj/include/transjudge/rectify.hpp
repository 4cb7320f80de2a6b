#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "transjudge/backend.hpp"
#include "transjudge/corpus.hpp"
#include "transjudge/exec.hpp"
#include "transjudge/taxonomy.hpp"

namespace transjudge {

struct RuleInput {
  std::string_view code;
  std::string_view source_code;
  const Verdict& verdict;
  Language target;
  std::optional<Language> source_lang;
};

struct RepairRule {
  std::string id;
  ErrorCategory category_hint = ErrorCategory::Other;
  std::function<bool(const RuleInput&)> trigger;
  std::function<std::string(const RuleInput&)> transform;
};

inline constexpr std::string_view kRuleCatalogVersion = "v1";

/// R-IMPORT, R-FORELSE, R-INTDIV, R-INPUTSPLIT, R-MUTBOUND, R-MAINCLASS.
const std::vector<RepairRule>& builtin_rules();

struct RuleCandidate {
  std::string rule_id;  // "R-A" or "R-A+R-B" for the composed candidate
  std::string code;
};

/// One candidate per triggered rule, then the composition of all triggered
/// rules in order when it differs from every single-rule candidate.
std::vector<RuleCandidate> apply_rules(std::string_view code, std::string_view source_code,
                                       const Verdict& verdict, Language target,
                                       const std::vector<RepairRule>& rules,
                                       std::optional<Language> source_lang = std::nullopt);

enum class RepairEncoding { WithDiagnostic, CodeOnly };

std::string_view to_string(RepairEncoding encoding);
std::optional<RepairEncoding> parse_encoding(std::string_view text);

/// Either the rule engine or a model reached through a backend.
struct Corrector {
  std::string name;  // "rules" or "backend:<name>"
  std::vector<RepairRule> rules;
  std::shared_ptr<Backend> backend;

  static Corrector rule_engine(std::vector<RepairRule> rules = builtin_rules());
  static Corrector model(std::shared_ptr<Backend> backend);
};

struct RepairRequest {
  TranslationTask task;
  std::string source_code;
  std::string code;
  Verdict verdict;
  std::vector<TestCase> tests;
};

struct RepairSettings {
  int budget = 4;
  Limits limits;
  ComparePolicy policy;
  RepairEncoding encoding = RepairEncoding::WithDiagnostic;
  std::optional<ToolchainSet> toolchains;
};

struct CandidateSummary {
  std::string corrector;
  Outcome outcome = Outcome::CompilationError;
  int tests_passed = 0;
};

struct RepairAttempt {
  std::string task_id;
  std::string corrector;  // empty when no corrector produced a candidate
  Verdict before;
  std::string code_before;
  std::string code_after;
  Verdict after;
  bool success = false;
  std::vector<CandidateSummary> candidates;
  std::vector<std::string> errors;
};

nlohmann::json attempt_to_json(const RepairAttempt& attempt);
RepairAttempt attempt_from_json(const nlohmann::json& doc);

/// Prompt handed to a model corrector.
RenderedPrompt repair_prompt(const RepairRequest& request, RepairEncoding encoding);

/// Line-level edit distance, used to prefer the smallest fix.
std::size_t line_edit_distance(std::string_view a, std::string_view b);

RepairAttempt repair_task(const RepairRequest& request, const std::vector<Corrector>& chain,
                          const RepairSettings& settings);

struct PairSource {
  RepairAttempt attempt;
  TranslationTask task;
  std::vector<TestCase> tests;
  std::string origin_backend;
  std::optional<ErrorCategory> category;
};

struct ExportResult {
  std::size_t count = 0;
  std::vector<std::string> rejected;  // "UnverifiedValidCode: ..." entries
};

/// Writes invalid/valid pairs as JSONL. The valid side comes from a successful
/// attempt or from `<manual_fixes>/<task_id>/fixed.<ext>`; both sides are
/// re-evaluated before a record is written.
ExportResult export_pairs(const std::vector<PairSource>& sources,
                          const std::optional<std::filesystem::path>& manual_fixes,
                          const std::filesystem::path& out, const Limits& limits,
                          const ComparePolicy& policy, const ToolchainSet& toolchains);

}  // namespace transjudge
