#pragma once

// Lexical helpers shared by extraction, classification and the rule corrector.
// Nothing here parses a language fully; the scanners only know enough about
// literals and comments to keep structural pattern matching honest.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "transjudge/language.hpp"

namespace transjudge::scan {

std::vector<std::string> split_lines(std::string_view text);
std::string join_lines(const std::vector<std::string>& lines);

std::string_view trim(std::string_view s);
std::string_view rtrim(std::string_view s);
bool is_blank(std::string_view s);
bool starts_with_word(std::string_view line, std::string_view word);

/// Drops leading and trailing blank lines; interior text is untouched.
std::string strip_blank_edges(std::string_view text);

/// Leading whitespace of a line.
std::string indentation_of(std::string_view line);

/// Copy of `code` with comment bodies and string/char literal contents replaced
/// by spaces. Offsets and newlines are preserved, so positions found in the
/// masked text index the original.
std::string mask_literals(std::string_view code, Language lang);

/// Offset of the bracket closing the one at `open_pos` in masked text.
std::optional<std::size_t> find_matching(std::string_view masked, std::size_t open_pos);

/// Whole-word occurrence search (identifier boundaries on both sides).
std::optional<std::size_t> find_word(std::string_view text, std::string_view word,
                                     std::size_t from = 0);
bool contains_word(std::string_view text, std::string_view word);
std::string replace_word(std::string_view text, std::string_view word,
                         std::string_view replacement);

bool is_ident_char(char c);

struct ControlFlowShape {
  int loops = 0;
  int conditionals = 0;

  friend bool operator==(const ControlFlowShape&, const ControlFlowShape&) = default;
};

/// Loop and branch keyword counts outside literals/comments.
ControlFlowShape control_flow_shape(std::string_view code, Language lang);

}  // namespace transjudge::scan
