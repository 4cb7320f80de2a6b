#pragma once

// Structural detectors shared by the classifier and the rule corrector. All of
// them work on the literal-masked text, so offsets index the original code.

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "transjudge/language.hpp"

namespace transjudge::patterns {

/// A `for (...) { ... } else { ... }` construct in a braces language.
struct ForElse {
  std::size_t for_pos = 0;
  std::size_t body_open = 0;
  std::size_t body_close = 0;
  std::size_t else_pos = 0;
  std::size_t else_open = 0;
  std::size_t else_close = 0;
};

std::vector<ForElse> find_for_else(std::string_view code, Language lang);

/// `break` statements that exit the loop whose body spans [open, close], i.e.
/// not nested in an inner loop or switch.
std::vector<std::size_t> own_breaks(std::string_view masked, std::size_t open, std::size_t close);

/// Python block headers (`elif x:`, `def f():`, `else:` ...) or `True`/`None`
/// style constants left in a braces-language target.
std::optional<std::string> python_construct(std::string_view code, Language target);

/// C-family constructs (`&&`, `++`, brace lines, `else if`, ...) left in a Python target.
std::optional<std::string> braces_construct(std::string_view python_code);

/// Names whose every assignment is integer-valued under the assumption that
/// `/` between integers was meant as integer division.
std::set<std::string> integer_names(std::string_view python_code);

/// Offsets of `/` operators whose operand chain is entirely integer-typed.
std::vector<std::size_t> integer_divisions(std::string_view python_code);

/// `for V in range(...)` whose bound reads a name assigned inside the body.
struct MutatedBoundLoop {
  std::size_t header_line = 0;
  std::size_t last_body_line = 0;
  std::string indent;
  std::string body_indent;
  std::string var;
  std::string start;
  std::string bound;
  std::string mutated;
};

std::vector<MutatedBoundLoop> mutated_range_loops(std::string_view python_code);

/// Run of consecutive `x = int(input())` lines at one indentation.
struct WholeLineReads {
  std::size_t first_line = 0;
  std::string indent;
  std::string conv;  // int or float
  std::vector<std::string> vars;
};

std::vector<WholeLineReads> whole_line_read_runs(std::string_view python_code);

/// True when some input line is already split into tokens.
bool reads_split_line(std::string_view python_code);

/// Fraction of counted lines that repeat another line exactly. Blank lines and
/// lines made only of punctuation are not counted.
double duplicate_line_ratio(std::string_view code);

}  // namespace transjudge::patterns
