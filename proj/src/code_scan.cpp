#include "transjudge/code_scan.hpp"

#include <cctype>

namespace transjudge::scan {

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.emplace_back(text.substr(start));
      break;
    }
    lines.emplace_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += '\n';
    out += lines[i];
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n\f\v");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n\f\v");
  return s.substr(b, e - b + 1);
}

std::string_view rtrim(std::string_view s) {
  const auto e = s.find_last_not_of(" \t\r\n\f\v");
  if (e == std::string_view::npos) return {};
  return s.substr(0, e + 1);
}

bool is_blank(std::string_view s) { return trim(s).empty(); }

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool starts_with_word(std::string_view line, std::string_view word) {
  line = trim(line);
  if (line.substr(0, word.size()) != word) return false;
  return line.size() == word.size() || !is_ident_char(line[word.size()]);
}

std::string strip_blank_edges(std::string_view text) {
  auto lines = split_lines(text);
  std::size_t first = 0;
  while (first < lines.size() && is_blank(lines[first])) ++first;
  std::size_t last = lines.size();
  while (last > first && is_blank(lines[last - 1])) --last;
  std::vector<std::string> kept(lines.begin() + static_cast<std::ptrdiff_t>(first),
                                lines.begin() + static_cast<std::ptrdiff_t>(last));
  return join_lines(kept);
}

std::string indentation_of(std::string_view line) {
  const auto b = line.find_first_not_of(" \t");
  return std::string(line.substr(0, b == std::string_view::npos ? line.size() : b));
}

namespace {

void blank_out(std::string& out, std::size_t from, std::size_t to) {
  for (std::size_t i = from; i < to && i < out.size(); ++i) {
    if (out[i] != '\n') out[i] = ' ';
  }
}

std::string mask_clike(std::string_view code) {
  std::string out(code);
  const std::size_t n = code.size();
  std::size_t i = 0;
  while (i < n) {
    const char c = code[i];
    if (c == '/' && i + 1 < n && code[i + 1] == '/') {
      std::size_t e = code.find('\n', i);
      if (e == std::string_view::npos) e = n;
      blank_out(out, i, e);
      i = e;
    } else if (c == '/' && i + 1 < n && code[i + 1] == '*') {
      std::size_t e = code.find("*/", i + 2);
      e = (e == std::string_view::npos) ? n : e + 2;
      blank_out(out, i, e);
      i = e;
    } else if (c == '"' && code.substr(i, 3) == "\"\"\"") {
      // Java text block.
      std::size_t e = code.find("\"\"\"", i + 3);
      e = (e == std::string_view::npos) ? n : e;
      blank_out(out, i + 3, e);
      i = (e == n) ? n : e + 3;
    } else if (c == '"' && i > 0 && code[i - 1] == 'R' &&
               (i < 2 || !is_ident_char(code[i - 2]))) {
      // C++ raw string R"delim( ... )delim".
      const std::size_t paren = code.find('(', i);
      if (paren == std::string_view::npos) {
        ++i;
        continue;
      }
      const std::string close = ")" + std::string(code.substr(i + 1, paren - i - 1)) + "\"";
      std::size_t e = code.find(close, paren);
      e = (e == std::string_view::npos) ? n : e;
      blank_out(out, i + 1, e + close.size() - 1);
      i = (e == n) ? n : e + close.size();
    } else if (c == '"' || c == '\'') {
      std::size_t j = i + 1;
      while (j < n && code[j] != c && code[j] != '\n') {
        if (code[j] == '\\') ++j;
        ++j;
      }
      blank_out(out, i + 1, j);
      i = j + 1;
    } else {
      ++i;
    }
  }
  return out;
}

std::string mask_python(std::string_view code) {
  std::string out(code);
  const std::size_t n = code.size();
  std::size_t i = 0;
  while (i < n) {
    const char c = code[i];
    if (c == '#') {
      std::size_t e = code.find('\n', i);
      if (e == std::string_view::npos) e = n;
      blank_out(out, i, e);
      i = e;
    } else if (c == '"' || c == '\'') {
      const std::string triple(3, c);
      if (code.substr(i, 3) == triple) {
        std::size_t e = code.find(triple, i + 3);
        e = (e == std::string_view::npos) ? n : e;
        blank_out(out, i + 3, e);
        i = (e == n) ? n : e + 3;
      } else {
        std::size_t j = i + 1;
        while (j < n && code[j] != c && code[j] != '\n') {
          if (code[j] == '\\') ++j;
          ++j;
        }
        blank_out(out, i + 1, j);
        i = j + 1;
      }
    } else {
      ++i;
    }
  }
  return out;
}

}  // namespace

std::string mask_literals(std::string_view code, Language lang) {
  return lang == Language::Python ? mask_python(code) : mask_clike(code);
}

std::optional<std::size_t> find_matching(std::string_view masked, std::size_t open_pos) {
  if (open_pos >= masked.size()) return std::nullopt;
  const char open = masked[open_pos];
  char close = 0;
  switch (open) {
    case '(': close = ')'; break;
    case '[': close = ']'; break;
    case '{': close = '}'; break;
    default: return std::nullopt;
  }
  int depth = 0;
  for (std::size_t i = open_pos; i < masked.size(); ++i) {
    if (masked[i] == open) ++depth;
    else if (masked[i] == close && --depth == 0) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> find_word(std::string_view text, std::string_view word,
                                     std::size_t from) {
  if (word.empty()) return std::nullopt;
  std::size_t pos = text.find(word, from);
  while (pos != std::string_view::npos) {
    const bool left_ok = pos == 0 || !is_ident_char(text[pos - 1]);
    const std::size_t end = pos + word.size();
    const bool right_ok = end >= text.size() || !is_ident_char(text[end]);
    if (left_ok && right_ok) return pos;
    pos = text.find(word, pos + 1);
  }
  return std::nullopt;
}

bool contains_word(std::string_view text, std::string_view word) {
  return find_word(text, word).has_value();
}

std::string replace_word(std::string_view text, std::string_view word,
                         std::string_view replacement) {
  std::string out;
  std::size_t last = 0;
  for (auto pos = find_word(text, word); pos; pos = find_word(text, word, *pos + word.size())) {
    out.append(text.substr(last, *pos - last));
    out.append(replacement);
    last = *pos + word.size();
  }
  out.append(text.substr(last));
  return out;
}

ControlFlowShape control_flow_shape(std::string_view code, Language lang) {
  ControlFlowShape shape;
  const std::string masked = mask_literals(code, lang);
  if (lang == Language::Python) {
    for (const auto& line : split_lines(masked)) {
      if (starts_with_word(line, "for") || starts_with_word(line, "while")) ++shape.loops;
      if (starts_with_word(line, "if") || starts_with_word(line, "elif")) ++shape.conditionals;
    }
    return shape;
  }
  for (std::string_view kw : {"for", "while"}) {
    for (auto p = find_word(masked, kw); p; p = find_word(masked, kw, *p + 1)) ++shape.loops;
  }
  for (std::string_view kw : {"if", "switch"}) {
    for (auto p = find_word(masked, kw); p; p = find_word(masked, kw, *p + 1)) {
      ++shape.conditionals;
    }
  }
  return shape;
}

}  // namespace transjudge::scan
