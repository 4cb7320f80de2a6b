#include "transjudge/taxonomy.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <set>
#include <sstream>

#include "transjudge/code_scan.hpp"
#include "transjudge/error.hpp"
#include "transjudge/io.hpp"
#include "transjudge/patterns.hpp"
#include "transjudge/prompt.hpp"
#include "transjudge/stdlib_symbols.hpp"

namespace transjudge {

std::string_view to_string(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::SyntacticDifference: return "SyntacticDifference";
    case ErrorCategory::SemanticDifference: return "SemanticDifference";
    case ErrorCategory::DependencyError: return "DependencyError";
    case ErrorCategory::LogicError: return "LogicError";
    case ErrorCategory::DataRelatedError: return "DataRelatedError";
    case ErrorCategory::ModelSpecificError: return "ModelSpecificError";
    case ErrorCategory::Other: return "Other";
  }
  return "Other";
}

std::optional<ErrorCategory> parse_category(std::string_view text) {
  for (ErrorCategory c : kAllCategories) {
    if (to_string(c) == text) return c;
  }
  return std::nullopt;
}

std::string_view to_string(LabelSource source) {
  return source == LabelSource::Manual ? "Manual" : "Heuristic";
}

namespace {

std::string normalize_quotes(std::string_view text) {
  std::string s(text);
  for (std::string_view q : {"\xE2\x80\x98", "\xE2\x80\x99"}) {
    for (auto pos = s.find(q); pos != std::string::npos; pos = s.find(q, pos)) {
      s.replace(pos, q.size(), "'");
    }
  }
  return s;
}

std::string excerpt(std::string_view s, std::size_t n = 120) {
  auto lines = scan::split_lines(scan::strip_blank_edges(s));
  std::string first = lines.empty() ? std::string() : std::string(scan::trim(lines.front()));
  if (first.size() > n) first = first.substr(0, n) + "...";
  return first;
}

CategoryLabel make(const std::string& task_id, ErrorCategory category, std::string_view rule,
                   std::string_view detail) {
  std::string evidence = std::string(kRuleVersion) + "/" + std::string(rule);
  if (!detail.empty()) evidence += ": " + std::string(detail);
  return {task_id, category, LabelSource::Heuristic, evidence};
}

std::optional<std::string> foreign_braces_construct(std::string_view code, Language target) {
  const std::string masked = scan::mask_literals(code, target);
  if (target == Language::Cpp) {
    for (std::string_view t : {"System.out", "public static void main", "String[]", "new Scanner",
                               "import java"}) {
      if (masked.find(t) != std::string::npos) return std::string(t);
    }
  } else if (target == Language::Java) {
    for (std::string_view t : {"std::", "cout", "cin >>", "#include", "->", "using namespace"}) {
      if (masked.find(t) != std::string::npos) return std::string(t);
    }
  }
  return std::nullopt;
}

std::optional<std::string> data_signature(const Verdict& verdict) {
  static const std::vector<std::regex> parse_errors = {
      std::regex(R"(ValueError: invalid literal for int\(\)[^\n]*)"),
      std::regex(R"(ValueError: could not convert string to float[^\n]*)"),
      std::regex(R"(ValueError: (not enough|too many) values to unpack[^\n]*)"),
      std::regex(R"(EOFError[^\n]*)"),
      std::regex(R"(java\.lang\.NumberFormatException[^\n]*)"),
      std::regex(R"(java\.util\.InputMismatchException[^\n]*)"),
      std::regex(R"(java\.util\.NoSuchElementException[^\n]*)"),
      std::regex(R"(std::invalid_argument[^\n]*)"),
  };
  for (const auto& run : verdict.failed_runs) {
    if (run.status != RunStatus::Crashed) continue;
    for (const auto& re : parse_errors) {
      std::smatch m;
      if (std::regex_search(run.stderr_data, m, re)) return m.str();
    }
  }
  for (const auto& run : verdict.failed_runs) {
    if (run.status != RunStatus::WrongOutput) continue;
    std::istringstream a(run.stdout_data), e(run.expected_excerpt);
    std::string ta, te;
    if (!(a >> ta) || !(e >> te) || ta == te) continue;
    auto lower = [](std::string s) {
      std::transform(s.begin(), s.end(), s.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      return s;
    };
    if (lower(ta) == lower(te)) return "first token differs in case: " + ta + " vs " + te;
    try {
      std::size_t ia = 0, ie = 0;
      const double va = std::stod(ta, &ia);
      const double ve = std::stod(te, &ie);
      if (ia == ta.size() && ie == te.size() && std::fabs(va - ve) < 1e-9) {
        return "first token formatted differently: " + ta + " vs " + te;
      }
    } catch (const std::exception&) {
    }
  }
  return std::nullopt;
}

}  // namespace

std::vector<std::string> unresolved_symbols(std::string_view diagnostic) {
  static const std::vector<std::regex> patterns = {
      std::regex(R"(symbol:\s+(?:class|variable|method)\s+(\w+))"),
      std::regex(R"re(Cannot determine simple type name "(\w+)")re"),
      std::regex(R"re(Unknown variable or type "(\w+)")re"),
      std::regex(R"(name '(\w+)' is not defined)"),
      std::regex(R"(No module named '(\w+))"),
      std::regex(R"('(?:std::)?(\w+)' was not declared)"),
      std::regex(R"('(?:std::)?(\w+)' does not name a type)"),
      std::regex(R"('(\w+)' is not a member of 'std')"),
      std::regex(R"('(\w+)' in namespace 'std' does not name a (?:template )?type)"),
  };
  const std::string text = normalize_quotes(diagnostic);
  std::vector<std::pair<std::size_t, std::string>> hits;
  for (const auto& re : patterns) {
    for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator();
         ++it) {
      hits.emplace_back(static_cast<std::size_t>(it->position(0)), (*it)[1].str());
    }
  }
  std::sort(hits.begin(), hits.end());
  std::vector<std::string> out;
  for (auto& [pos, sym] : hits) {
    if (std::find(out.begin(), out.end(), sym) == out.end()) out.push_back(std::move(sym));
  }
  return out;
}

std::string diagnostic_text(const Verdict& verdict) {
  std::string text = verdict.compile_log;
  if (verdict.first_failure) text += "\n" + verdict.first_failure->diagnostic;
  for (const auto& run : verdict.failed_runs) text += "\n" + run.stderr_data;
  return text;
}

CategoryLabel classify(const std::string& task_id, const Verdict& verdict,
                       std::string_view translated_code, std::string_view source_code,
                       Language target, std::optional<Language> source_lang,
                       const ClassifyOptions& options) {
  if (verdict.outcome == Outcome::Success) {
    fail(ErrorCode::PreconditionViolation, "classify needs a failed verdict (" + task_id + ")");
  }
  if (!source_lang) source_lang = detect_language(source_code);
  const Outcome outcome = verdict.outcome;

  if (scan::is_blank(translated_code)) {
    return make(task_id, ErrorCategory::ModelSpecificError, "model-specific", "empty output");
  }
  if (auto detected = detect_language(translated_code); detected && *detected != target) {
    return make(task_id, ErrorCategory::ModelSpecificError, "model-specific",
                "output looks like " + std::string(display_name(*detected)));
  }
  if (const double ratio = patterns::duplicate_line_ratio(translated_code);
      ratio > options.duplicate_threshold) {
    return make(task_id, ErrorCategory::ModelSpecificError, "model-specific",
                std::to_string(static_cast<int>(std::lround(ratio * 100))) + "% duplicate lines");
  }

  if (outcome == Outcome::CompilationError || outcome == Outcome::RuntimeError) {
    for (const auto& sym : unresolved_symbols(diagnostic_text(verdict))) {
      if (import_for_symbol(target, sym)) {
        return make(task_id, ErrorCategory::DependencyError, "dependency", sym);
      }
    }
  }

  if (outcome == Outcome::CompilationError) {
    auto construct = target == Language::Python ? patterns::braces_construct(translated_code)
                                                 : patterns::python_construct(translated_code, target);
    if (!construct) construct = foreign_braces_construct(translated_code, target);
    if (construct) return make(task_id, ErrorCategory::SyntacticDifference, "syntactic", *construct);
  }

  if (outcome == Outcome::FunctionalError && target == Language::Python) {
    if (source_lang && *source_lang != Language::Python &&
        !patterns::integer_divisions(translated_code).empty()) {
      return make(task_id, ErrorCategory::SemanticDifference, "semantic",
                  "integer division written as /");
    }
    if (auto loops = patterns::mutated_range_loops(translated_code); !loops.empty()) {
      return make(task_id, ErrorCategory::SemanticDifference, "semantic",
                  "range bound reads " + loops.front().mutated + ", which the loop body mutates");
    }
  }

  if (outcome == Outcome::RuntimeError || outcome == Outcome::FunctionalError) {
    if (auto sig = data_signature(verdict)) {
      return make(task_id, ErrorCategory::DataRelatedError, "data", excerpt(*sig));
    }
  }

  if (outcome == Outcome::FunctionalError && source_lang && !scan::is_blank(source_code)) {
    const auto src = scan::control_flow_shape(source_code, *source_lang);
    const auto dst = scan::control_flow_shape(translated_code, target);
    if (!(src == dst)) {
      std::ostringstream d;
      d << "loops " << src.loops << "->" << dst.loops << ", branches " << src.conditionals
        << "->" << dst.conditionals;
      return make(task_id, ErrorCategory::LogicError, "logic", d.str());
    }
  }

  std::string detail;
  if (verdict.first_failure) detail = excerpt(verdict.first_failure->diagnostic);
  return make(task_id, ErrorCategory::Other, "other", detail);
}

std::map<ErrorCategory, double> distribution(const std::vector<CategoryLabel>& labels) {
  if (labels.empty()) fail(ErrorCode::EmptyInput, "no labels to summarize");
  std::map<ErrorCategory, std::size_t> counts;
  for (ErrorCategory c : kAllCategories) counts[c] = 0;
  for (const auto& l : labels) ++counts[l.category];
  std::map<ErrorCategory, double> out;
  for (const auto& [c, n] : counts) {
    out[c] = static_cast<double>(n) / static_cast<double>(labels.size());
  }
  return out;
}

MergeResult merge_labels(const std::vector<CategoryLabel>& heuristic,
                         const std::optional<std::filesystem::path>& manual_file) {
  std::map<std::string, CategoryLabel> by_task;
  for (const auto& l : heuristic) by_task[l.task_id] = l;

  MergeResult result;
  if (manual_file) {
    const auto lines = read_lines(*manual_file);
    const std::string where = manual_file->string();
    if (lines.empty() || std::string(scan::trim(lines.front())) != "task_id,category") {
      fail(ErrorCode::MalformedLabelFile, where + ": header must be task_id,category");
    }
    std::set<std::string> seen;
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const std::string& line = lines[i];
      const auto comma = line.find(',');
      if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
        fail(ErrorCode::MalformedLabelFile, where + ":" + std::to_string(i + 1) + ": expected 2 fields");
      }
      const std::string task(scan::trim(std::string_view(line).substr(0, comma)));
      const std::string name(scan::trim(std::string_view(line).substr(comma + 1)));
      auto category = parse_category(name);
      if (task.empty() || !category) {
        fail(ErrorCode::MalformedLabelFile,
             where + ":" + std::to_string(i + 1) + ": unknown category '" + name + "'");
      }
      if (!seen.insert(task).second) {
        fail(ErrorCode::MalformedLabelFile, where + ":" + std::to_string(i + 1) +
                                                ": duplicate task id " + task);
      }
      auto it = by_task.find(task);
      if (it == by_task.end()) {
        result.warnings.push_back("UnknownTaskId: " + task + " is not part of this run");
        continue;
      }
      it->second = {task, *category, LabelSource::Manual, "manual"};
    }
  }
  for (auto& [task, label] : by_task) result.labels.push_back(std::move(label));
  return result;
}

}  // namespace transjudge
