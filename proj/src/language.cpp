#include "transjudge/language.hpp"

#include <algorithm>
#include <cctype>

namespace transjudge {

std::string_view to_id(Language lang) {
  switch (lang) {
    case Language::Cpp: return "cpp";
    case Language::Java: return "java";
    case Language::Python: return "python";
  }
  return "?";
}

std::string_view display_name(Language lang) {
  switch (lang) {
    case Language::Cpp: return "C++";
    case Language::Java: return "Java";
    case Language::Python: return "Python";
  }
  return "?";
}

std::string_view file_extension(Language lang) {
  switch (lang) {
    case Language::Cpp: return "cpp";
    case Language::Java: return "java";
    case Language::Python: return "py";
  }
  return "txt";
}

std::optional<Language> parse_language(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "cpp" || lower == "c++" || lower == "cxx" || lower == "cc") return Language::Cpp;
  if (lower == "java") return Language::Java;
  if (lower == "python" || lower == "py" || lower == "python3") return Language::Python;
  return std::nullopt;
}

}  // namespace transjudge
