#include "transjudge/rectify.hpp"

#include <algorithm>
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

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool is_failure(const RuleInput& in) { return in.verdict.outcome != Outcome::Success; }

std::optional<Language> source_of(const RuleInput& in) {
  return in.source_lang ? in.source_lang : detect_language(in.source_code);
}

struct Edit {
  std::size_t pos;
  std::size_t len;
  std::string text;
};

std::string apply_edits(std::string_view code, std::vector<Edit> edits) {
  std::sort(edits.begin(), edits.end(), [](const Edit& a, const Edit& b) { return a.pos > b.pos; });
  std::string out(code);
  for (const auto& e : edits) out.replace(e.pos, e.len, e.text);
  return out;
}

// R-IMPORT ------------------------------------------------------------------

std::vector<std::string> missing_imports(const RuleInput& in) {
  std::set<std::string> lines;
  bool reported = false;
  for (const auto& sym : unresolved_symbols(diagnostic_text(in.verdict))) {
    auto line = import_for_symbol(in.target, sym);
    if (!line || has_import_for(in.code, in.target, sym)) continue;
    lines.insert(*line);
    reported = true;
  }
  if (!reported) return {};

  const std::string masked = scan::mask_literals(in.code, in.target);
  if (in.target == Language::Java) {
    for (const auto& sym : known_symbols(Language::Java)) {
      if (!scan::contains_word(masked, sym) || has_import_for(in.code, in.target, sym)) continue;
      const std::regex declared("\\b(class|interface|enum|record)\\s+" + sym + "\\b");
      if (std::regex_search(masked, declared)) continue;
      lines.insert(*import_for_symbol(in.target, sym));
    }
  } else if (in.target == Language::Python) {
    for (const auto& sym : known_symbols(Language::Python)) {
      auto line = import_for_symbol(in.target, sym);
      if (line->rfind("import ", 0) != 0) continue;
      const std::regex attr("(^|[^\\w.])" + sym + "\\s*\\.");
      if (std::regex_search(masked, attr) && !has_import_for(in.code, in.target, sym)) {
        lines.insert(*line);
      }
    }
  }
  return {lines.begin(), lines.end()};
}

std::string insert_imports(std::string_view code, Language lang,
                           const std::vector<std::string>& imports) {
  auto lines = scan::split_lines(code);
  std::size_t at = 0;
  if (lang == Language::Java) {
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (scan::starts_with_word(lines[i], "package")) {
        at = i + 1;
        break;
      }
    }
  } else if (lang == Language::Python) {
    static const std::regex preamble(R"(^(#!.*|#.*coding[:=].*|from\s+__future__\s+import.*)$)");
    while (at < lines.size() && std::regex_match(lines[at], preamble)) ++at;
  }
  lines.insert(lines.begin() + static_cast<std::ptrdiff_t>(at), imports.begin(), imports.end());
  return scan::join_lines(lines);
}

// R-FORELSE -----------------------------------------------------------------

std::string fresh_name(std::string_view code, std::string base) {
  std::string name = base;
  for (int n = 2; scan::contains_word(code, name); ++n) name = base + std::to_string(n);
  return name;
}

std::string rewrite_for_else(std::string_view code, Language lang) {
  std::string out(code);
  for (int guard = 0; guard < 16; ++guard) {
    const auto found = patterns::find_for_else(out, lang);
    if (found.empty()) break;
    const auto& fe = found.front();
    const std::string masked = scan::mask_literals(out, lang);
    const std::string flag = fresh_name(out, "forElseCompleted");
    const std::string type = lang == Language::Java ? "boolean" : "bool";

    const std::size_t nl = out.rfind('\n', fe.for_pos);
    const std::size_t line_start = nl == std::string::npos ? 0 : nl + 1;
    const std::string indent = scan::indentation_of(std::string_view(out).substr(line_start));
    const bool own_line = line_start + indent.size() == fe.for_pos;

    std::vector<Edit> edits;
    edits.push_back({fe.for_pos, 0, type + " " + flag + " = true;" + (own_line ? "\n" + indent : " ")});
    for (std::size_t b : patterns::own_breaks(masked, fe.body_open, fe.body_close)) {
      const std::size_t semi = masked.find(';', b);
      if (semi == std::string::npos) continue;
      edits.push_back({b, semi + 1 - b, "{ " + flag + " = false; break; }"});
    }
    edits.push_back({fe.else_pos, fe.else_open - fe.else_pos, "if (" + flag + ") "});
    out = apply_edits(out, edits);
  }
  return out;
}

// R-INTDIV ------------------------------------------------------------------

bool intdiv_applies(const RuleInput& in) {
  if (in.target != Language::Python || in.verdict.outcome != Outcome::FunctionalError) return false;
  auto src = source_of(in);
  return src && *src != Language::Python;
}

// R-INPUTSPLIT --------------------------------------------------------------

struct SplitPlan {
  std::size_t first_line = 0;
  std::size_t count = 0;
  std::string indent;
  std::string conv;
  std::vector<std::string> vars;
};

std::optional<SplitPlan> input_split_plan(const RuleInput& in) {
  if (in.target != Language::Python) return std::nullopt;
  if (in.verdict.outcome != Outcome::RuntimeError && in.verdict.outcome != Outcome::FunctionalError) {
    return std::nullopt;
  }
  if (patterns::reads_split_line(in.code)) return std::nullopt;
  static const std::regex int_err(R"(invalid literal for int\(\) with base 10: '([^'\n]*)')");
  static const std::regex float_err(R"(could not convert string to float: '([^'\n]*)')");
  for (const auto& run : in.verdict.failed_runs) {
    std::smatch m;
    std::string conv;
    if (std::regex_search(run.stderr_data, m, int_err)) conv = "int";
    else if (std::regex_search(run.stderr_data, m, float_err)) conv = "float";
    else continue;
    const std::string literal = m[1].str();
    std::size_t k = 0;
    std::istringstream tokens(literal);
    for (std::string t; tokens >> t;) ++k;
    if (k < 2) continue;
    for (const auto& r : patterns::whole_line_read_runs(in.code)) {
      if (r.conv == conv && r.vars.size() >= k) {
        return SplitPlan{r.first_line, k, r.indent, conv,
                         std::vector<std::string>(r.vars.begin(), r.vars.begin() + static_cast<std::ptrdiff_t>(k))};
      }
    }
  }
  return std::nullopt;
}

// R-MUTBOUND ----------------------------------------------------------------

std::string rewrite_mutated_bounds(std::string_view code) {
  std::string out(code);
  for (int guard = 0; guard < 16; ++guard) {
    const auto loops = patterns::mutated_range_loops(out);
    if (loops.empty()) break;
    const auto& l = loops.front();
    auto lines = scan::split_lines(out);
    lines.insert(lines.begin() + static_cast<std::ptrdiff_t>(l.last_body_line) + 1,
                 l.body_indent + l.var + " += 1");
    lines[l.header_line] = l.indent + "while " + l.var + " < " + l.bound + ":";
    lines.insert(lines.begin() + static_cast<std::ptrdiff_t>(l.header_line),
                 l.indent + l.var + " = " + l.start);
    out = scan::join_lines(lines);
  }
  return out;
}

// R-MAINCLASS ---------------------------------------------------------------

bool entry_class_problem(const RuleInput& in) {
  if (in.target != Language::Java || !is_failure(in)) return false;
  static const std::regex symptom(
      R"(should be declared in a file named|Could not find or load main class|Main method not found|ClassNotFoundException: )");
  if (!std::regex_search(diagnostic_text(in.verdict), symptom)) return false;
  const std::string entry = detect_java_main_class(in.code);
  const std::string masked = scan::mask_literals(in.code, Language::Java);
  static const std::regex main_class(R"(\bclass\s+Main\b)");
  return entry != "Main" && !std::regex_search(masked, main_class);
}

std::string rename_entry_class(std::string_view code) {
  const std::string entry = detect_java_main_class(code);
  const std::string masked = scan::mask_literals(code, Language::Java);
  std::vector<Edit> edits;
  for (auto pos = scan::find_word(masked, entry); pos; pos = scan::find_word(masked, entry, *pos + 1)) {
    edits.push_back({*pos, entry.size(), "Main"});
  }
  return apply_edits(code, edits);
}

std::vector<RepairRule> make_rules() {
  std::vector<RepairRule> rules;
  rules.push_back({"R-IMPORT", ErrorCategory::DependencyError,
                   [](const RuleInput& in) { return is_failure(in) && !missing_imports(in).empty(); },
                   [](const RuleInput& in) {
                     auto imports = missing_imports(in);
                     return imports.empty() ? std::string(in.code)
                                            : insert_imports(in.code, in.target, imports);
                   }});
  rules.push_back({"R-FORELSE", ErrorCategory::SyntacticDifference,
                   [](const RuleInput& in) {
                     return is_failure(in) && !patterns::find_for_else(in.code, in.target).empty();
                   },
                   [](const RuleInput& in) { return rewrite_for_else(in.code, in.target); }});
  rules.push_back({"R-INTDIV", ErrorCategory::SemanticDifference,
                   [](const RuleInput& in) {
                     return intdiv_applies(in) && !patterns::integer_divisions(in.code).empty();
                   },
                   [](const RuleInput& in) {
                     if (!intdiv_applies(in)) return std::string(in.code);
                     std::vector<Edit> edits;
                     for (std::size_t pos : patterns::integer_divisions(in.code)) {
                       edits.push_back({pos, 0, "/"});
                     }
                     return apply_edits(in.code, edits);
                   }});
  rules.push_back({"R-INPUTSPLIT", ErrorCategory::DataRelatedError,
                   [](const RuleInput& in) { return input_split_plan(in).has_value(); },
                   [](const RuleInput& in) {
                     auto plan = input_split_plan(in);
                     if (!plan) return std::string(in.code);
                     auto lines = scan::split_lines(in.code);
                     std::string targets;
                     for (const auto& v : plan->vars) targets += (targets.empty() ? "" : ", ") + v;
                     const auto first = lines.begin() + static_cast<std::ptrdiff_t>(plan->first_line);
                     lines.erase(first, first + static_cast<std::ptrdiff_t>(plan->count));
                     lines.insert(lines.begin() + static_cast<std::ptrdiff_t>(plan->first_line),
                                  plan->indent + targets + " = map(" + plan->conv +
                                      ", input().split())");
                     return scan::join_lines(lines);
                   }});
  rules.push_back({"R-MUTBOUND", ErrorCategory::SemanticDifference,
                   [](const RuleInput& in) {
                     return in.target == Language::Python && is_failure(in) &&
                            in.verdict.outcome != Outcome::CompilationError &&
                            !patterns::mutated_range_loops(in.code).empty();
                   },
                   [](const RuleInput& in) { return rewrite_mutated_bounds(in.code); }});
  rules.push_back({"R-MAINCLASS", ErrorCategory::Other, entry_class_problem,
                   [](const RuleInput& in) { return rename_entry_class(in.code); }});
  return rules;
}

}  // namespace

const std::vector<RepairRule>& builtin_rules() {
  static const std::vector<RepairRule> rules = make_rules();
  return rules;
}

std::vector<RuleCandidate> apply_rules(std::string_view code, std::string_view source_code,
                                       const Verdict& verdict, Language target,
                                       const std::vector<RepairRule>& rules,
                                       std::optional<Language> source_lang) {
  if (verdict.outcome == Outcome::Success) {
    fail(ErrorCode::PreconditionViolation, "rules apply to failed translations only");
  }
  std::vector<RuleCandidate> out;
  std::string composed(code);
  std::vector<std::string> fired;
  for (const auto& rule : rules) {
    RuleInput single{code, source_code, verdict, target, source_lang};
    if (rule.trigger(single)) {
      std::string candidate = rule.transform(single);
      if (candidate != code) out.push_back({rule.id, std::move(candidate)});
    }
    RuleInput chained{composed, source_code, verdict, target, source_lang};
    if (rule.trigger(chained)) {
      std::string next = rule.transform(chained);
      if (next != composed) {
        composed = std::move(next);
        fired.push_back(rule.id);
      }
    }
  }
  if (fired.size() > 1 && composed != code &&
      std::none_of(out.begin(), out.end(), [&](const auto& c) { return c.code == composed; })) {
    std::string id;
    for (const auto& f : fired) id += (id.empty() ? "" : "+") + f;
    out.push_back({id, composed});
  }
  return out;
}

std::string_view to_string(RepairEncoding encoding) {
  return encoding == RepairEncoding::CodeOnly ? "code-only" : "with-diagnostic";
}

std::optional<RepairEncoding> parse_encoding(std::string_view text) {
  if (text == "code-only") return RepairEncoding::CodeOnly;
  if (text == "with-diagnostic") return RepairEncoding::WithDiagnostic;
  return std::nullopt;
}

Corrector Corrector::rule_engine(std::vector<RepairRule> rules) {
  return {"rules", std::move(rules), nullptr};
}

Corrector Corrector::model(std::shared_ptr<Backend> backend) {
  return {"backend:" + backend->spec().name, {}, std::move(backend)};
}

namespace {

json summary_to_json(const CandidateSummary& c) {
  return {{"corrector", c.corrector},
          {"outcome", std::string(to_string(c.outcome))},
          {"tests_passed", c.tests_passed}};
}

}  // namespace

json attempt_to_json(const RepairAttempt& a) {
  json candidates = json::array();
  for (const auto& c : a.candidates) candidates.push_back(summary_to_json(c));
  return {{"task_id", a.task_id},
          {"corrector", a.corrector},
          {"success", a.success},
          {"before", verdict_to_json(a.before)},
          {"after", verdict_to_json(a.after)},
          {"code_before", a.code_before},
          {"code_after", a.code_after},
          {"candidates", candidates},
          {"errors", a.errors}};
}

RepairAttempt attempt_from_json(const json& doc) {
  RepairAttempt a;
  a.task_id = doc.at("task_id").get<std::string>();
  a.corrector = doc.value("corrector", std::string());
  a.success = doc.value("success", false);
  a.before = verdict_from_json(doc.at("before"));
  a.after = verdict_from_json(doc.at("after"));
  a.code_before = doc.value("code_before", std::string());
  a.code_after = doc.value("code_after", std::string());
  for (const auto& c : doc.value("candidates", json::array())) {
    a.candidates.push_back({c.at("corrector").get<std::string>(),
                            parse_outcome(c.at("outcome").get<std::string>()).value_or(Outcome::CompilationError),
                            c.value("tests_passed", 0)});
  }
  a.errors = doc.value("errors", std::vector<std::string>{});
  return a;
}

RenderedPrompt repair_prompt(const RepairRequest& request, RepairEncoding encoding) {
  const std::string src(display_name(request.task.source_lang));
  const std::string dst(display_name(request.task.target_lang));
  auto block = [](std::string_view code) {
    std::string s(code);
    if (s.empty() || s.back() != '\n') s += '\n';
    return s;
  };
  std::string text;
  if (encoding == RepairEncoding::WithDiagnostic) {
    text += src + " source:\n" + block(request.source_code) + "\n";
    text += dst + " translation:\n" + block(request.code) + "\n";
    std::string diag = request.verdict.first_failure ? request.verdict.first_failure->diagnostic
                                                     : std::string(to_string(request.verdict.outcome));
    text += "Error (" + std::string(to_string(request.verdict.outcome)) + "):\n" + block(diag) + "\n";
    text += "Correct the " + dst + " translation so it behaves like the " + src + " source. ";
  } else {
    text += block(request.code) + "\n";
    text += "Correct the " + dst + " code above. ";
  }
  text += "Print only the " + dst + " code, end with \"" + std::string(kDefaultSentinel) + "\".\n";
  return {text, TemplateFamily::ChatStyle, std::string(kDefaultSentinel)};
}

std::size_t line_edit_distance(std::string_view a, std::string_view b) {
  const auto x = scan::split_lines(a);
  const auto y = scan::split_lines(b);
  std::vector<std::size_t> prev(y.size() + 1), cur(y.size() + 1);
  for (std::size_t j = 0; j <= y.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= x.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= y.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x[i - 1] == y[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[y.size()];
}

RepairAttempt repair_task(const RepairRequest& request, const std::vector<Corrector>& chain,
                          const RepairSettings& settings) {
  if (request.verdict.outcome == Outcome::Success) {
    fail(ErrorCode::PreconditionViolation, request.task.task_id + " already passes");
  }
  if (chain.empty()) fail(ErrorCode::PreconditionViolation, "corrector chain is empty");
  if (settings.budget < 1) fail(ErrorCode::PreconditionViolation, "repair budget must be >= 1");

  const ToolchainSet toolchains = settings.toolchains ? *settings.toolchains : ToolchainSet::from_env();
  const Language target = request.task.target_lang;

  RepairAttempt attempt;
  attempt.task_id = request.task.task_id;
  attempt.before = request.verdict;
  attempt.code_before = request.code;
  attempt.code_after = request.code;
  attempt.after = request.verdict;

  struct Evaluated {
    std::string corrector;
    std::string code;
    Verdict verdict;
    std::size_t order;
  };
  std::vector<Evaluated> evaluated;
  std::set<std::string> seen{request.code};

  auto try_candidate = [&](const std::string& corrector, const std::string& code) {
    if (static_cast<int>(evaluated.size()) >= settings.budget || !seen.insert(code).second) return false;
    Verdict v = evaluate(code, target, request.tests, settings.limits, settings.policy, toolchains);
    attempt.candidates.push_back({corrector, v.outcome, v.tests_passed});
    evaluated.push_back({corrector, code, std::move(v), evaluated.size()});
    return evaluated.back().verdict.outcome == Outcome::Success;
  };

  bool done = false;
  for (const auto& corrector : chain) {
    if (done || static_cast<int>(evaluated.size()) >= settings.budget) break;
    if (corrector.backend) {
      try {
        const Completion c = corrector.backend->complete(repair_prompt(request, settings.encoding));
        const auto extracted = extract_code(c.raw_text, target, std::string(kDefaultSentinel));
        if (scan::is_blank(extracted.code) || extracted.code == request.code) {
          attempt.errors.push_back(corrector.name + ": no new code in completion");
        } else {
          done = try_candidate(corrector.name, extracted.code);
        }
      } catch (const Error& e) {
        attempt.errors.push_back(corrector.name + ": " + e.what());
      }
      continue;
    }
    for (const auto& cand : apply_rules(request.code, request.source_code, request.verdict, target,
                                        corrector.rules, request.task.source_lang)) {
      if ((done = try_candidate(cand.rule_id, cand.code))) break;
      if (static_cast<int>(evaluated.size()) >= settings.budget) break;
    }
  }

  if (evaluated.empty()) return attempt;
  auto better = [&](const Evaluated& a, const Evaluated& b) {
    const int ra = progress_rank(a.verdict.outcome), rb = progress_rank(b.verdict.outcome);
    if (ra != rb) return ra > rb;
    if (a.verdict.tests_passed != b.verdict.tests_passed) return a.verdict.tests_passed > b.verdict.tests_passed;
    const auto da = line_edit_distance(request.code, a.code);
    const auto db = line_edit_distance(request.code, b.code);
    if (da != db) return da < db;
    return a.order < b.order;
  };
  const auto best = std::min_element(evaluated.begin(), evaluated.end(),
                                     [&](const Evaluated& a, const Evaluated& b) { return better(a, b); });
  attempt.corrector = best->corrector;
  attempt.code_after = best->code;
  attempt.after = best->verdict;
  attempt.success = best->verdict.outcome == Outcome::Success;
  return attempt;
}

ExportResult export_pairs(const std::vector<PairSource>& sources,
                          const std::optional<fs::path>& manual_fixes, const fs::path& out,
                          const Limits& limits, const ComparePolicy& policy,
                          const ToolchainSet& toolchains) {
  ExportResult result;
  std::string body;
  for (const auto& src : sources) {
    const Language target = src.task.target_lang;
    std::optional<std::string> valid;
    if (src.attempt.success) valid = src.attempt.code_after;
    if (!valid && manual_fixes) {
      const fs::path fix = *manual_fixes / src.task.task_id /
                           ("fixed." + std::string(file_extension(target)));
      if (fs::exists(fix)) valid = read_file(fix);
    }
    if (!valid) continue;

    const Verdict good = evaluate(*valid, target, src.tests, limits, policy, toolchains);
    if (good.outcome != Outcome::Success) {
      result.rejected.push_back("UnverifiedValidCode: " + src.task.task_id + " valid side ended " +
                                std::string(to_string(good.outcome)));
      continue;
    }
    const Verdict bad = evaluate(src.attempt.code_before, target, src.tests, limits, policy, toolchains);
    if (bad.outcome == Outcome::Success) {
      result.rejected.push_back("UnverifiedValidCode: " + src.task.task_id +
                                " invalid side passes all tests");
      continue;
    }
    json rec{{"task_id", src.task.task_id},
             {"invalid_code", src.attempt.code_before},
             {"valid_code", *valid},
             {"source_lang", std::string(to_id(src.task.source_lang))},
             {"target_lang", std::string(to_id(target))},
             {"origin_backend", src.origin_backend},
             {"error_outcome", std::string(to_string(bad.outcome))},
             {"category", src.category ? json(std::string(to_string(*src.category))) : json(nullptr)}};
    body += rec.dump() + "\n";
    ++result.count;
  }
  write_file_atomic(out, body);
  return result;
}

}  // namespace transjudge
