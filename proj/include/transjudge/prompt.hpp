#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "transjudge/language.hpp"

namespace transjudge {

enum class TemplateFamily { ChatStyle, CompletionStyle };

inline constexpr std::string_view kSourcePlaceholder = "$SOURCE_LANG";
inline constexpr std::string_view kTargetPlaceholder = "$TARGET_LANG";
inline constexpr std::string_view kDefaultSentinel = "|End-of-Code|";

struct PromptTemplate {
  TemplateFamily family = TemplateFamily::ChatStyle;
  std::string task_description;
  std::string indicator;
  std::optional<std::string> sentinel;
};

struct RenderedPrompt {
  std::string text;
  TemplateFamily template_family = TemplateFamily::ChatStyle;
  std::optional<std::string> sentinel;
};

enum class ExtractionMethod { Sentinel, FencedBlock, LanguageHeuristic, WholeCompletion };

std::string_view to_string(ExtractionMethod method);

struct ExtractionResult {
  std::string code;
  ExtractionMethod method = ExtractionMethod::WholeCompletion;
  std::vector<std::string> warnings;
};

/// Source code, task description and sentinel-terminated indicator, as used for
/// chat models.
PromptTemplate default_chat_template();
/// Same task description followed by a bare target-language cue.
PromptTemplate default_completion_template();

/// Throws Error(PlaceholderMissing) when the template breaks its invariants.
void check_template(const PromptTemplate& tmpl);

/// Layout: source code, blank line, task description, newline, indicator.
RenderedPrompt render_prompt(const PromptTemplate& tmpl, std::string_view code, Language source,
                             Language target);

/// Pulls the code region out of a raw completion. Cascade: sentinel cut, then
/// the first fenced block tagged with the target language (or untagged), then
/// a target-language opener line, then the whole completion.
ExtractionResult extract_code(std::string_view raw, Language target,
                              const std::optional<std::string>& sentinel);

/// True when the line opens a program in `lang` (#include, import, def, ...).
bool is_opener_line(std::string_view line, Language lang);

/// Best-scoring language by surface features, or nullopt when no language
/// scores or the top score is tied.
std::optional<Language> detect_language(std::string_view code);

PromptTemplate template_from_json(const nlohmann::json& doc);
nlohmann::json template_to_json(const PromptTemplate& tmpl);

}  // namespace transjudge
