#include "transjudge/patterns.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <regex>

#include "transjudge/code_scan.hpp"

namespace transjudge::patterns {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

std::size_t skip_space(std::string_view s, std::size_t pos) {
  while (pos < s.size() && is_space(s[pos])) ++pos;
  return pos;
}

bool word_at(std::string_view s, std::size_t pos, std::string_view word) {
  if (s.substr(pos, word.size()) != word) return false;
  if (pos > 0 && scan::is_ident_char(s[pos - 1])) return false;
  const std::size_t end = pos + word.size();
  return end >= s.size() || !scan::is_ident_char(s[end]);
}

std::optional<std::size_t> match_backward(std::string_view s, std::size_t close_pos) {
  const char close = s[close_pos];
  const char open = close == ')' ? '(' : close == ']' ? '[' : '{';
  int depth = 0;
  for (std::size_t i = close_pos + 1; i-- > 0;) {
    if (s[i] == close) ++depth;
    else if (s[i] == open && --depth == 0) return i;
  }
  return std::nullopt;
}

}  // namespace

// ---------------------------------------------------------------------------
// Braces languages

std::vector<ForElse> find_for_else(std::string_view code, Language lang) {
  std::vector<ForElse> found;
  if (lang == Language::Python) return found;
  const std::string masked = scan::mask_literals(code, lang);
  for (auto pos = scan::find_word(masked, "for"); pos; pos = scan::find_word(masked, "for", *pos + 3)) {
    std::size_t prev = *pos;
    while (prev > 0 && is_space(masked[prev - 1])) --prev;
    if (prev > 0 && std::string_view(";{}:").find(masked[prev - 1]) == std::string_view::npos) continue;

    std::size_t p = skip_space(masked, *pos + 3);
    if (p >= masked.size() || masked[p] != '(') continue;
    auto paren_close = scan::find_matching(masked, p);
    if (!paren_close) continue;
    p = skip_space(masked, *paren_close + 1);
    if (p >= masked.size() || masked[p] != '{') continue;
    auto body_close = scan::find_matching(masked, p);
    if (!body_close) continue;
    std::size_t e = skip_space(masked, *body_close + 1);
    if (e >= masked.size() || !word_at(masked, e, "else")) continue;
    std::size_t eo = skip_space(masked, e + 4);
    if (eo >= masked.size() || masked[eo] != '{') continue;
    auto else_close = scan::find_matching(masked, eo);
    if (!else_close) continue;
    found.push_back({*pos, p, *body_close, e, eo, *else_close});
  }
  return found;
}

std::vector<std::size_t> own_breaks(std::string_view masked, std::size_t open, std::size_t close) {
  std::vector<std::pair<std::size_t, std::size_t>> nested;
  for (std::string_view kw : {"for", "while", "switch", "do"}) {
    for (auto pos = scan::find_word(masked, kw, open + 1); pos && *pos < close;
         pos = scan::find_word(masked, kw, *pos + kw.size())) {
      std::size_t p = skip_space(masked, *pos + kw.size());
      if (kw != "do") {
        if (p >= close || masked[p] != '(') continue;
        auto pc = scan::find_matching(masked, p);
        if (!pc) continue;
        p = skip_space(masked, *pc + 1);
      }
      if (p < close && masked[p] == '{') {
        if (auto m = scan::find_matching(masked, p)) nested.emplace_back(p, *m);
      } else if (kw != "do") {
        auto semi = masked.find(';', p);
        if (semi != std::string_view::npos) nested.emplace_back(p, semi);
      }
    }
  }
  std::vector<std::size_t> out;
  for (auto pos = scan::find_word(masked, "break", open + 1); pos && *pos < close;
       pos = scan::find_word(masked, "break", *pos + 5)) {
    const bool inner = std::any_of(nested.begin(), nested.end(), [&](const auto& r) {
      return *pos > r.first && *pos < r.second;
    });
    if (!inner) out.push_back(*pos);
  }
  return out;
}

std::optional<std::string> python_construct(std::string_view code, Language target) {
  if (target == Language::Python) return std::nullopt;
  if (!find_for_else(code, target).empty()) return "for...else";
  static const std::regex header(
      R"(^(elif\b.*|else|try|finally|except\b.*|def\s+\w+\s*\(.*\)|(if|while|for)\s[^{};]*)\s*:$)");
  static const std::regex for_in(R"(^for\s+\w+\s+in\s)");
  const std::string masked = scan::mask_literals(code, target);
  for (const auto& raw : scan::split_lines(masked)) {
    const std::string line(scan::trim(raw));
    if (std::regex_search(line, header) || std::regex_search(line, for_in)) return line;
  }
  for (std::string_view word : {"elif", "True", "False", "None"}) {
    if (scan::contains_word(masked, word)) return std::string(word);
  }
  return std::nullopt;
}

std::optional<std::string> braces_construct(std::string_view python_code) {
  const std::string masked = scan::mask_literals(python_code, Language::Python);
  for (const auto& raw : scan::split_lines(python_code)) {
    if (scan::trim(raw).substr(0, 8) == "#include") return std::string(scan::trim(raw));
  }
  for (std::string_view token : {"&&", "||", "++", "/*", "System.out", "std::", "public static"}) {
    if (masked.find(token) != std::string::npos) return std::string(token);
  }
  static const std::regex else_if(R"(\belse\s+if\b)");
  static const std::regex c_for(R"(\bfor\s*\([^)]*;[^)]*;)");
  static const std::regex bang(R"(![^=])");
  for (const auto& raw : scan::split_lines(masked)) {
    const std::string line(scan::trim(raw));
    if (line.empty()) continue;
    if (line == "}" || line.back() == '{') return line;
    if (std::regex_search(line, else_if) || std::regex_search(line, c_for) ||
        std::regex_search(line, bang)) {
      return line;
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Python integer inference

namespace {

struct Token {
  enum Kind { Name, Int, Other } kind;
  std::string text;
};

std::vector<Token> tokenize(std::string_view expr) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < expr.size()) {
    const char c = expr[i];
    if (is_space(c)) {
      ++i;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < expr.size() && scan::is_ident_char(expr[j])) ++j;
      out.push_back({Token::Name, std::string(expr.substr(i, j - i))});
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '.' && i + 1 < expr.size() && std::isdigit(static_cast<unsigned char>(expr[i + 1])))) {
      std::size_t j = i;
      while (j < expr.size() && (std::isalnum(static_cast<unsigned char>(expr[j])) ||
                                 expr[j] == '_' || expr[j] == '.')) {
        ++j;
      }
      std::string lit(expr.substr(i, j - i));
      static const std::regex int_lit(R"(^(0[xXoObB][0-9a-fA-F_]+|[0-9][0-9_]*)$)");
      out.push_back({std::regex_match(lit, int_lit) ? Token::Int : Token::Other, lit});
      i = j;
    } else {
      std::size_t len = 1;
      for (std::string_view op : {"**", "//", "<<", ">>", "==", "!=", "<=", ">="}) {
        if (expr.substr(i, 2) == op) len = 2;
      }
      out.push_back({Token::Other, std::string(expr.substr(i, len))});
      i += len;
    }
  }
  return out;
}

bool int_expr(std::string_view expr, const std::set<std::string>& ints) {
  const auto toks = tokenize(expr);
  if (toks.empty()) return false;
  static const std::set<std::string> int_calls{"int", "len", "ord"};
  static const std::set<std::string> pass_calls{"abs", "max", "min"};
  static const std::set<std::string> ops{"+", "-", "*", "//", "/", "%", "&", "|", "^",
                                         "~", "<<", ">>"};
  std::vector<bool> stack;  // true when the paren is an argument list
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const Token& t = toks[i];
    const bool call = i + 1 < toks.size() && toks[i + 1].text == "(";
    if (t.kind == Token::Int) continue;
    if (t.kind == Token::Name) {
      if (call && int_calls.count(t.text)) {
        int depth = 0;
        std::size_t j = i + 1;
        for (; j < toks.size(); ++j) {
          if (toks[j].text == "(") ++depth;
          else if (toks[j].text == ")" && --depth == 0) break;
        }
        if (j == toks.size()) return false;
        i = j;
        continue;
      }
      if (call && pass_calls.count(t.text)) {
        stack.push_back(true);
        ++i;
        continue;
      }
      if (call || !ints.count(t.text)) return false;
      continue;
    }
    if (t.text == "(") {
      stack.push_back(false);
    } else if (t.text == ")") {
      if (stack.empty()) return false;
      stack.pop_back();
    } else if (t.text == ",") {
      if (stack.empty() || !stack.back()) return false;
    } else if (!ops.count(t.text)) {
      return false;
    }
  }
  return stack.empty();
}

std::vector<std::string> split_top_level(std::string_view s, char sep) {
  std::vector<std::string> parts;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(' || s[i] == '[' || s[i] == '{') ++depth;
    else if (s[i] == ')' || s[i] == ']' || s[i] == '}') --depth;
    else if (s[i] == sep && depth == 0) {
      parts.emplace_back(scan::trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  parts.emplace_back(scan::trim(s.substr(start)));
  return parts;
}

// Offsets of plain `=` assignment operators at paren depth zero.
std::vector<std::size_t> assignment_eqs(std::string_view s) {
  std::vector<std::size_t> out;
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '(' || c == '[' || c == '{') ++depth;
    else if (c == ')' || c == ']' || c == '}') --depth;
    else if (c == '=' && depth == 0) {
      const char prev = i > 0 ? s[i - 1] : ' ';
      const char next = i + 1 < s.size() ? s[i + 1] : ' ';
      if (next == '=' || std::string_view("=!<>:").find(prev) != std::string_view::npos) {
        if (next == '=') ++i;
        continue;
      }
      out.push_back(i);
    }
  }
  return out;
}

bool is_identifier(std::string_view s) {
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return scan::is_ident_char(c) && c != '$'; });
}

// Logical lines of masked Python: physical lines joined while brackets are open.
std::vector<std::string> logical_lines(std::string_view masked) {
  std::vector<std::string> out;
  std::string current;
  int depth = 0;
  for (const auto& line : scan::split_lines(masked)) {
    if (!current.empty()) current += ' ';
    current += line;
    for (char c : line) {
      if (c == '(' || c == '[' || c == '{') ++depth;
      else if (c == ')' || c == ']' || c == '}') --depth;
    }
    if (depth <= 0) {
      out.push_back(std::move(current));
      current.clear();
      depth = 0;
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

}  // namespace

std::set<std::string> integer_names(std::string_view python_code) {
  const std::string masked = scan::mask_literals(python_code, Language::Python);
  std::map<std::string, std::vector<std::string>> assigned;
  std::set<std::string> opaque;

  static const std::regex for_range(R"(^for\s+(\w+)\s+in\s+range\s*\()");
  static const std::regex for_other(R"(^for\s+(.+?)\s+in\s)");
  static const std::regex def_line(R"(^(?:async\s+)?def\s+(\w+)\s*\((.*)\)\s*(->.*)?:)");
  static const std::regex as_name(R"(\bas\s+(\w+))");
  static const std::regex aug(R"(^(\w+)\s*(\+|-|\*|//|/|%|\*\*|&|\||\^|<<|>>)=\s*(.+)$)");
  static const std::regex walrus(R"((\w+)\s*:=)");
  static const std::regex global_decl(R"(^(global|nonlocal)\s+(.+)$)");

  for (const auto& raw : logical_lines(masked)) {
    std::string line(scan::trim(raw));
    // single-line compound statements: `if c: x = 1`
    static const std::regex inline_body(R"(^(if|elif|else|while|for|with|try|except|finally)\b[^:]*:\s*(\S.*)$)");
    std::smatch m;
    for (auto it = std::sregex_iterator(line.begin(), line.end(), walrus); it != std::sregex_iterator(); ++it) {
      opaque.insert((*it)[1].str());
    }
    for (auto it = std::sregex_iterator(line.begin(), line.end(), as_name); it != std::sregex_iterator(); ++it) {
      opaque.insert((*it)[1].str());
    }
    if (std::regex_search(line, m, for_range)) {
      assigned[m[1].str()].push_back("0");
      continue;
    }
    if (std::regex_search(line, m, for_other)) {
      for (const auto& n : split_top_level(m[1].str(), ',')) opaque.insert(std::string(scan::trim(n)));
      continue;
    }
    if (std::regex_search(line, m, def_line)) {
      opaque.insert(m[1].str());
      for (auto p : split_top_level(m[2].str(), ',')) {
        auto name = p.substr(0, p.find_first_of(":= "));
        while (!name.empty() && name.front() == '*') name.erase(0, 1);
        if (!name.empty()) opaque.insert(name);
      }
      continue;
    }
    if (std::regex_search(line, m, global_decl)) continue;
    if (std::regex_match(line, m, inline_body)) line = m[2].str();
    if (std::regex_match(line, m, aug)) {
      const std::string name = m[1].str();
      assigned[name].push_back(name + " " + m[2].str() + " (" + m[3].str() + ")");
      continue;
    }
    const auto eqs = assignment_eqs(line);
    if (eqs.empty()) continue;
    const std::string rhs(scan::trim(std::string_view(line).substr(eqs.back() + 1)));
    std::size_t start = 0;
    for (std::size_t eq : eqs) {
      const std::string target(scan::trim(std::string_view(line).substr(start, eq - start)));
      start = eq + 1;
      auto names = split_top_level(target, ',');
      for (auto& n : names) {
        while (!n.empty() && (n.front() == '(' || n.front() == '*')) n.erase(0, 1);
        while (!n.empty() && n.back() == ')') n.pop_back();
      }
      if (names.size() == 1) {
        if (is_identifier(names[0])) assigned[names[0]].push_back(rhs);
        continue;
      }
      static const std::regex map_int(R"(^map\s*\(\s*int\s*,)");
      const auto values = split_top_level(rhs, ',');
      for (std::size_t k = 0; k < names.size(); ++k) {
        if (!is_identifier(names[k])) continue;
        if (std::regex_search(rhs, map_int)) assigned[names[k]].push_back("0");
        else if (values.size() == names.size()) assigned[names[k]].push_back(values[k]);
        else opaque.insert(names[k]);
      }
    }
  }

  std::set<std::string> ints;
  for (const auto& [name, exprs] : assigned) {
    if (!opaque.count(name)) ints.insert(name);
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (auto it = ints.begin(); it != ints.end();) {
      const auto& exprs = assigned.at(*it);
      const bool ok = std::all_of(exprs.begin(), exprs.end(),
                                  [&](const std::string& e) { return int_expr(e, ints); });
      if (ok) {
        ++it;
      } else {
        it = ints.erase(it);
        changed = true;
      }
    }
  }
  return ints;
}

namespace {

// Start of the operand ending just before `end` (exclusive), same line only.
std::optional<std::size_t> operand_start(std::string_view s, std::size_t end) {
  std::size_t p = end;
  while (p > 0 && (s[p - 1] == ' ' || s[p - 1] == '\t')) --p;
  if (p == 0) return std::nullopt;
  if (s[p - 1] == ')' || s[p - 1] == ']') {
    auto open = match_backward(s, p - 1);
    if (!open) return std::nullopt;
    p = *open;
  } else if (scan::is_ident_char(s[p - 1])) {
    while (p > 0 && (scan::is_ident_char(s[p - 1]))) --p;
    return p;
  } else {
    return std::nullopt;
  }
  std::size_t q = p;
  while (q > 0 && scan::is_ident_char(s[q - 1])) --q;
  return q;
}

// End (exclusive) of the operand starting at or after `begin`, same line only.
std::optional<std::size_t> operand_end(std::string_view s, std::size_t begin) {
  std::size_t p = begin;
  while (p < s.size() && (s[p] == ' ' || s[p] == '\t')) ++p;
  if (p < s.size() && (s[p] == '-' || s[p] == '+')) ++p;
  while (p < s.size() && (s[p] == ' ' || s[p] == '\t')) ++p;
  if (p >= s.size()) return std::nullopt;
  if (scan::is_ident_char(s[p])) {
    while (p < s.size() && scan::is_ident_char(s[p])) ++p;
  }
  while (p < s.size() && (s[p] == '(' || s[p] == '[')) {
    auto close = scan::find_matching(s, p);
    if (!close) return std::nullopt;
    p = *close + 1;
  }
  return p == begin ? std::nullopt : std::optional<std::size_t>(p);
}

// Multiplicative operator ending just before `pos` (spaces skipped): length or 0.
std::size_t mul_op_before(std::string_view s, std::size_t pos, std::size_t& op_start) {
  std::size_t p = pos;
  while (p > 0 && (s[p - 1] == ' ' || s[p - 1] == '\t')) --p;
  if (p == 0) return 0;
  const char c = s[p - 1];
  if (c == '%') { op_start = p - 1; return 1; }
  if (c == '/') { op_start = p >= 2 && s[p - 2] == '/' ? p - 2 : p - 1; return p - op_start; }
  if (c == '*' && !(p >= 2 && s[p - 2] == '*')) { op_start = p - 1; return 1; }
  return 0;
}

std::size_t mul_op_after(std::string_view s, std::size_t pos, std::size_t& op_end) {
  std::size_t p = pos;
  while (p < s.size() && (s[p] == ' ' || s[p] == '\t')) ++p;
  if (p >= s.size()) return 0;
  const char c = s[p];
  const char n = p + 1 < s.size() ? s[p + 1] : ' ';
  if (c == '%' && n != '=') { op_end = p + 1; return 1; }
  if (c == '/' && n == '/') { op_end = p + 2; return 2; }
  if (c == '/' && n != '=') { op_end = p + 1; return 1; }
  if (c == '*' && n != '*' && n != '=') { op_end = p + 1; return 1; }
  return 0;
}

}  // namespace

std::vector<std::size_t> integer_divisions(std::string_view python_code) {
  const std::string masked = scan::mask_literals(python_code, Language::Python);
  const auto ints = integer_names(python_code);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < masked.size(); ++i) {
    if (masked[i] != '/') continue;
    if ((i > 0 && masked[i - 1] == '/') || (i + 1 < masked.size() && masked[i + 1] == '/')) continue;
    if (i + 1 < masked.size() && masked[i + 1] == '=') continue;

    std::vector<std::string> atoms;
    bool ok = true;
    // walk left through the multiplicative chain
    for (std::size_t end = i;;) {
      auto start = operand_start(masked, end);
      if (!start) { ok = false; break; }
      atoms.emplace_back(masked.substr(*start, end - *start));
      std::size_t op_start = 0;
      if (mul_op_before(masked, *start, op_start) == 0) break;
      end = op_start;
    }
    for (std::size_t begin = i + 1; ok;) {
      auto end = operand_end(masked, begin);
      if (!end) { ok = false; break; }
      atoms.emplace_back(masked.substr(begin, *end - begin));
      std::size_t op_end = 0;
      if (mul_op_after(masked, *end, op_end) == 0) break;
      begin = op_end;
    }
    if (!ok) continue;
    const bool all_int = std::all_of(atoms.begin(), atoms.end(), [&](const std::string& a) {
      auto t = scan::trim(a);
      if (!t.empty() && (t.front() == '-' || t.front() == '+')) t.remove_prefix(1);
      return int_expr(t, ints);
    });
    if (all_int) out.push_back(i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Python loops and input

std::vector<MutatedBoundLoop> mutated_range_loops(std::string_view python_code) {
  const std::string masked = scan::mask_literals(python_code, Language::Python);
  const auto mlines = scan::split_lines(masked);
  const auto lines = scan::split_lines(python_code);
  static const std::regex header(R"(^(\s*)for\s+(\w+)\s+in\s+range\s*\((.*)\)\s*:\s*$)");
  std::vector<MutatedBoundLoop> found;

  for (std::size_t i = 0; i < mlines.size(); ++i) {
    std::smatch m;
    if (!std::regex_match(mlines[i], m, header)) continue;
    const std::string indent = m[1].str();
    const std::size_t args_pos = static_cast<std::size_t>(m.position(3));
    const auto args = split_top_level(std::string_view(lines[i]).substr(args_pos, m.length(3)), ',');
    if (args.empty() || args.size() > 2 || args.back().empty()) continue;

    std::size_t last = i;
    std::string body_indent;
    for (std::size_t j = i + 1; j < mlines.size(); ++j) {
      if (scan::is_blank(mlines[j])) continue;
      const std::string ind = scan::indentation_of(mlines[j]);
      if (ind.size() <= indent.size()) break;
      if (body_indent.empty()) body_indent = ind;
      last = j;
    }
    if (last == i) continue;

    std::vector<std::string> body(mlines.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                                  mlines.begin() + static_cast<std::ptrdiff_t>(last) + 1);
    const std::string body_text = scan::join_lines(body);
    if (scan::contains_word(body_text, "continue")) continue;

    auto assigns = [&](const std::string& name) {
      const std::regex target("(^|\\n)\\s*(\\w+\\s*,\\s*)*" + name +
                              "\\s*(,\\s*\\w+\\s*)*(=[^=]|\\+=|-=|\\*=|//=|/=|%=)");
      const std::regex loop_var("\\bfor\\s+" + name + "\\s+in\\b");
      return std::regex_search(body_text, target) || std::regex_search(body_text, loop_var);
    };
    const std::string var = m[2].str();
    if (assigns(var)) continue;

    const std::string bound = args.back();
    std::string mutated;
    for (const auto& tok : tokenize(bound)) {
      if (tok.kind == Token::Name && assigns(tok.text)) {
        mutated = tok.text;
        break;
      }
    }
    if (mutated.empty()) continue;
    found.push_back({i, last, indent, body_indent, var, args.size() == 2 ? args[0] : "0", bound,
                     mutated});
  }
  return found;
}

std::vector<WholeLineReads> whole_line_read_runs(std::string_view python_code) {
  static const std::regex read(
      R"(^(\s*)([A-Za-z_]\w*)\s*=\s*(int|float)\(\s*input\(\s*\)\s*(\.strip\(\s*\))?\s*\)\s*$)");
  std::vector<WholeLineReads> runs;
  const auto lines = scan::split_lines(python_code);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::smatch m;
    const std::string line(scan::rtrim(lines[i]));
    if (!std::regex_match(line, m, read)) continue;
    if (!runs.empty()) {
      auto& last = runs.back();
      if (last.first_line + last.vars.size() == i && last.indent == m[1].str() &&
          last.conv == m[3].str()) {
        last.vars.push_back(m[2].str());
        continue;
      }
    }
    runs.push_back({i, m[1].str(), m[3].str(), {m[2].str()}});
  }
  return runs;
}

bool reads_split_line(std::string_view python_code) {
  static const std::regex split(
      R"((input\(\s*\)|readline\(\s*\))\s*(\.strip\(\s*\)|\.rstrip\(\s*\))?\s*\.split\()");
  return std::regex_search(std::string(python_code), split);
}

double duplicate_line_ratio(std::string_view code) {
  std::map<std::string, int> counts;
  int total = 0;
  for (const auto& raw : scan::split_lines(code)) {
    const auto line = scan::trim(raw);
    if (std::none_of(line.begin(), line.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)); })) {
      continue;
    }
    ++counts[std::string(line)];
    ++total;
  }
  if (total == 0) return 0.0;
  int dup = 0;
  for (const auto& [line, n] : counts) {
    if (n > 1) dup += n;
  }
  return static_cast<double>(dup) / total;
}

}  // namespace transjudge::patterns
