#include "transjudge/prompt.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <regex>

#include "transjudge/code_scan.hpp"
#include "transjudge/error.hpp"

namespace transjudge {

using scan::split_lines;
using scan::trim;

std::string_view to_string(ExtractionMethod method) {
  switch (method) {
    case ExtractionMethod::Sentinel: return "Sentinel";
    case ExtractionMethod::FencedBlock: return "FencedBlock";
    case ExtractionMethod::LanguageHeuristic: return "LanguageHeuristic";
    case ExtractionMethod::WholeCompletion: return "WholeCompletion";
  }
  return "?";
}

PromptTemplate default_chat_template() {
  PromptTemplate t;
  t.family = TemplateFamily::ChatStyle;
  t.task_description = "Translate the above $SOURCE_LANG code to $TARGET_LANG.";
  t.indicator = "Print only the $TARGET_LANG code, end with \"|End-of-Code|\".";
  t.sentinel = std::string(kDefaultSentinel);
  return t;
}

PromptTemplate default_completion_template() {
  PromptTemplate t;
  t.family = TemplateFamily::CompletionStyle;
  t.task_description = "Translate the above $SOURCE_LANG code to $TARGET_LANG.";
  t.indicator = "$TARGET_LANG:";
  t.sentinel = std::nullopt;
  return t;
}

namespace {

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

// "$NAME" variables other than the two language placeholders.
std::optional<std::string> stray_variable(std::string_view text) {
  static const std::regex var(R"(\$[A-Z][A-Z_]*)");
  const std::string s(text);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), var); it != std::sregex_iterator();
       ++it) {
    const std::string name = it->str();
    if (name != kSourcePlaceholder && name != kTargetPlaceholder) return name;
  }
  return std::nullopt;
}

std::string substitute(std::string text, Language source, Language target) {
  auto replace_all = [&text](std::string_view from, std::string_view to) {
    for (auto pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size())) {
      text.replace(pos, from.size(), to);
    }
  };
  replace_all(kSourcePlaceholder, display_name(source));
  replace_all(kTargetPlaceholder, display_name(target));
  return text;
}

}  // namespace

void check_template(const PromptTemplate& tmpl) {
  if (count_occurrences(tmpl.task_description, kSourcePlaceholder) != 1 ||
      count_occurrences(tmpl.task_description, kTargetPlaceholder) != 1) {
    fail(ErrorCode::PlaceholderMissing,
         "task description must contain $SOURCE_LANG and $TARGET_LANG exactly once each");
  }
  if (tmpl.family == TemplateFamily::ChatStyle && scan::is_blank(tmpl.indicator)) {
    fail(ErrorCode::PlaceholderMissing, "chat-style templates need an indicator");
  }
  for (std::string_view part : {std::string_view(tmpl.task_description),
                                std::string_view(tmpl.indicator)}) {
    if (auto stray = stray_variable(part)) {
      fail(ErrorCode::PlaceholderMissing, "unknown template variable " + *stray);
    }
  }
  if (tmpl.sentinel && tmpl.sentinel->empty()) {
    fail(ErrorCode::PlaceholderMissing, "sentinel must be non-empty when set");
  }
}

RenderedPrompt render_prompt(const PromptTemplate& tmpl, std::string_view code, Language source,
                             Language target) {
  if (source == target) {
    fail(ErrorCode::PreconditionViolation, "source and target language are both " +
                                               std::string(display_name(source)));
  }
  if (scan::is_blank(code)) fail(ErrorCode::PreconditionViolation, "source code is empty");
  check_template(tmpl);

  RenderedPrompt out;
  out.template_family = tmpl.family;
  out.sentinel = tmpl.sentinel;
  out.text.append(code);
  if (out.text.back() != '\n') out.text += '\n';
  out.text += '\n';
  out.text += substitute(tmpl.task_description, source, target);
  out.text += '\n';
  if (!tmpl.indicator.empty()) {
    out.text += substitute(tmpl.indicator, source, target);
    out.text += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Extraction

bool is_opener_line(std::string_view line, Language lang) {
  const std::string_view t = trim(line);
  auto starts = [&t](std::string_view prefix) { return t.substr(0, prefix.size()) == prefix; };
  switch (lang) {
    case Language::Cpp:
      return starts("#include") || starts("using namespace") || starts("int main(") ||
             starts("int main (") || starts("typedef ") || starts("#define ");
    case Language::Java: {
      static const std::regex klass(R"(^(public\s+|final\s+|abstract\s+)*class\s+\w+)");
      return starts("import java") || starts("import static java") || starts("package ") ||
             std::regex_search(std::string(t), klass);
    }
    case Language::Python: {
      if (starts("import java")) return false;
      static const std::regex import_line(R"(^(import\s+\w+|from\s+[\w.]+\s+import\s+))");
      static const std::regex read_line(
          R"(^\w+(\s*,\s*\w+)*\s*=\s*(int|float|input|map|list|sys\.stdin)\b)");
      const std::string s(t);
      return std::regex_search(s, import_line) || starts("def ") ||
             starts("if __name__") || std::regex_search(s, read_line);
    }
  }
  return false;
}

namespace {

bool is_block_header(std::string_view t) {
  static constexpr std::array<std::string_view, 9> kw = {"else", "try",   "finally", "class", "def",
                                                         "for",  "while", "if",      "with"};
  return std::any_of(kw.begin(), kw.end(),
                     [&t](std::string_view k) { return scan::starts_with_word(t, k); });
}

// Natural-language chatter such as "Here is the translated code:" or
// "Hope it helps". Indented lines are never prose.
bool is_prose_line(std::string_view line) {
  if (line.empty() || line[0] == ' ' || line[0] == '\t') return false;
  const std::string_view t = trim(line);
  if (t.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(t[0]))) return false;
  if (t.find_first_of(";{}=()[]<>#\"`") != std::string_view::npos) return false;
  if (is_block_header(t)) return false;
  for (Language l : kAllLanguages) {
    if (is_opener_line(t, l)) return false;
  }
  const bool multi_word = t.find(' ') != std::string_view::npos;
  const bool punctuated = t.back() == '.' || t.back() == '!' || t.back() == ':' ||
                          t.back() == '?';
  return multi_word || punctuated;
}

struct Fence {
  std::string tag;
  std::string body;
  bool terminated = false;
};

bool is_fence_line(std::string_view line) {
  const std::string_view t = trim(line);
  return t.substr(0, 3) == "```" || t.substr(0, 3) == "~~~";
}

std::vector<Fence> find_fences(std::string_view text) {
  std::vector<Fence> fences;
  const auto lines = split_lines(text);
  std::size_t i = 0;
  while (i < lines.size()) {
    if (!is_fence_line(lines[i])) {
      ++i;
      continue;
    }
    const std::string_view open = trim(lines[i]);
    const char mark = open[0];
    Fence f;
    std::string_view tag = open;
    while (!tag.empty() && tag.front() == mark) tag.remove_prefix(1);
    f.tag = std::string(trim(tag));
    std::vector<std::string> body;
    std::size_t j = i + 1;
    for (; j < lines.size(); ++j) {
      const std::string_view t = trim(lines[j]);
      if (t.size() >= 3 && t.find_first_not_of(mark) == std::string_view::npos) {
        f.terminated = true;
        break;
      }
      body.push_back(lines[j]);
    }
    f.body = scan::join_lines(body);
    fences.push_back(std::move(f));
    i = j + 1;
  }
  return fences;
}

bool tag_matches(const std::string& tag, Language target) {
  if (tag.empty()) return true;
  // Tags may carry attributes ("python title=x"); the first word names the language.
  const std::string first = tag.substr(0, tag.find_first_of(" \t{"));
  auto lang = parse_language(first);
  return lang && *lang == target;
}

std::optional<ExtractionResult> from_fences(std::string_view text, Language target,
                                            ExtractionMethod method) {
  const auto fences = find_fences(text);
  std::vector<const Fence*> matching;
  for (const auto& f : fences) {
    if (tag_matches(f.tag, target)) matching.push_back(&f);
  }
  if (matching.empty()) return std::nullopt;
  ExtractionResult r;
  r.method = method;
  r.code = scan::strip_blank_edges(matching.front()->body);
  if (!matching.front()->terminated) r.warnings.push_back("unterminated fenced block");
  if (fences.size() > 1) {
    r.warnings.push_back("ignored " + std::to_string(fences.size() - 1) +
                         " additional fenced block(s)");
  }
  if (scan::is_blank(r.code)) return std::nullopt;
  return r;
}

std::string drop_leading_chatter(std::string_view text) {
  auto lines = split_lines(text);
  std::size_t first = 0;
  while (first < lines.size() &&
         (scan::is_blank(lines[first]) || is_prose_line(lines[first]) || is_fence_line(lines[first]))) {
    ++first;
  }
  std::vector<std::string> kept(lines.begin() + static_cast<std::ptrdiff_t>(first), lines.end());
  // A stray closing fence right before the sentinel is not code either.
  while (!kept.empty() && (scan::is_blank(kept.back()) || is_fence_line(kept.back()))) {
    kept.pop_back();
  }
  return scan::strip_blank_edges(scan::join_lines(kept));
}

std::optional<std::string> from_openers(std::string_view text, Language target) {
  const auto lines = split_lines(text);
  std::size_t start = lines.size();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (is_opener_line(lines[i], target)) {
      start = i;
      break;
    }
  }
  if (start == lines.size()) return std::nullopt;
  // Stop at the first prose paragraph after the code.
  std::size_t end = lines.size();
  for (std::size_t i = start + 1; i < lines.size(); ++i) {
    if ((is_prose_line(lines[i]) && scan::is_blank(lines[i - 1])) || is_fence_line(lines[i])) {
      end = i;
      break;
    }
  }
  while (end > start && (scan::is_blank(lines[end - 1]) || is_prose_line(lines[end - 1]))) --end;
  std::vector<std::string> kept(lines.begin() + static_cast<std::ptrdiff_t>(start),
                                lines.begin() + static_cast<std::ptrdiff_t>(end));
  std::string code = scan::strip_blank_edges(scan::join_lines(kept));
  if (scan::is_blank(code)) return std::nullopt;
  return code;
}

std::string erase_all(std::string text, std::string_view needle) {
  if (needle.empty()) return text;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos)) {
    text.erase(pos, needle.size());
  }
  return text;
}

}  // namespace

ExtractionResult extract_code(std::string_view raw, Language target,
                              const std::optional<std::string>& sentinel) {
  std::string rest(raw);
  std::vector<std::string> carried;

  if (sentinel && !sentinel->empty()) {
    const auto cut = rest.find(*sentinel);
    if (cut != std::string::npos) {
      const std::string_view region = std::string_view(rest).substr(0, cut);
      if (auto fenced = from_fences(region, target, ExtractionMethod::Sentinel)) {
        return *fenced;
      }
      std::string code = drop_leading_chatter(region);
      if (!scan::is_blank(code)) {
        ExtractionResult r;
        r.method = ExtractionMethod::Sentinel;
        r.code = std::move(code);
        return r;
      }
      carried.push_back("no code before sentinel");
    }
    rest = erase_all(std::move(rest), *sentinel);
  }

  if (auto fenced = from_fences(rest, target, ExtractionMethod::FencedBlock)) {
    fenced->warnings.insert(fenced->warnings.begin(), carried.begin(), carried.end());
    return *fenced;
  }
  if (auto code = from_openers(rest, target)) {
    ExtractionResult r;
    r.method = ExtractionMethod::LanguageHeuristic;
    r.code = std::move(*code);
    r.warnings = carried;
    return r;
  }
  ExtractionResult r;
  r.method = ExtractionMethod::WholeCompletion;
  r.code = scan::strip_blank_edges(rest);
  r.warnings = carried;
  r.warnings.push_back("no code region detected");
  return r;
}

std::optional<Language> detect_language(std::string_view code) {
  const auto lines = split_lines(code);
  std::array<int, 3> score{0, 0, 0};
  auto add = [&score](Language l, int v) { score[static_cast<std::size_t>(l)] += v; };
  auto has = [&code](std::string_view s) { return code.find(s) != std::string_view::npos; };

  if (has("#include")) add(Language::Cpp, 3);
  if (has("std::")) add(Language::Cpp, 2);
  if (has("using namespace std")) add(Language::Cpp, 3);
  if (scan::contains_word(code, "cout") || scan::contains_word(code, "cin")) add(Language::Cpp, 2);
  if (has("int main(") || has("int main (")) add(Language::Cpp, 2);

  if (has("System.out.")) add(Language::Java, 3);
  if (has("import java.")) add(Language::Java, 3);
  if (has("public static void main")) add(Language::Java, 3);
  if (has("String[]")) add(Language::Java, 2);
  if (has("new Scanner")) add(Language::Java, 2);
  if (has("public class")) add(Language::Java, 2);

  int py_headers = 0;
  for (const auto& line : lines) {
    const std::string_view t = trim(line);
    if (scan::starts_with_word(t, "def") || scan::starts_with_word(t, "elif")) add(Language::Python, 2);
    if ((scan::starts_with_word(t, "import") && t.find("java") == std::string_view::npos &&
         t.back() != ';') ||
        (scan::starts_with_word(t, "from") && t.find(" import ") != std::string_view::npos)) {
      add(Language::Python, 2);
    }
    if (!t.empty() && t.back() == ':' && py_headers < 3 &&
        (scan::starts_with_word(t, "for") || scan::starts_with_word(t, "while") ||
         scan::starts_with_word(t, "if") || scan::starts_with_word(t, "else"))) {
      ++py_headers;
      add(Language::Python, 1);
    }
  }
  if (has("input()")) add(Language::Python, 2);
  if (has("print(") && !has("printf(") && !has("System.out.print")) add(Language::Python, 1);
  if (has(" in range(")) add(Language::Python, 2);
  if (has("__name__")) add(Language::Python, 3);

  const auto best = std::max_element(score.begin(), score.end());
  if (*best <= 0) return std::nullopt;
  if (std::count(score.begin(), score.end(), *best) > 1) return std::nullopt;
  return static_cast<Language>(best - score.begin());
}

PromptTemplate template_from_json(const nlohmann::json& doc) {
  PromptTemplate t;
  const std::string family = doc.value("family", "chat");
  if (family == "chat") t.family = TemplateFamily::ChatStyle;
  else if (family == "completion") t.family = TemplateFamily::CompletionStyle;
  else fail(ErrorCode::ConfigError, "template family must be chat or completion");
  t.task_description = doc.value("task_description", std::string());
  t.indicator = doc.value("indicator", std::string());
  if (doc.contains("sentinel") && !doc.at("sentinel").is_null()) {
    t.sentinel = doc.at("sentinel").get<std::string>();
  }
  check_template(t);
  return t;
}

nlohmann::json template_to_json(const PromptTemplate& tmpl) {
  nlohmann::json doc;
  doc["family"] = tmpl.family == TemplateFamily::ChatStyle ? "chat" : "completion";
  doc["task_description"] = tmpl.task_description;
  doc["indicator"] = tmpl.indicator;
  doc["sentinel"] = tmpl.sentinel ? nlohmann::json(*tmpl.sentinel) : nlohmann::json(nullptr);
  return doc;
}

}  // namespace transjudge
