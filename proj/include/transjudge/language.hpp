#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace transjudge {

enum class Language { Cpp, Java, Python };

inline constexpr std::array<Language, 3> kAllLanguages = {Language::Cpp, Language::Java,
                                                          Language::Python};

/// Manifest/config spelling: "cpp", "java", "python".
std::string_view to_id(Language lang);
/// Human spelling used in prompts and tables: "C++", "Java", "Python".
std::string_view display_name(Language lang);
std::string_view file_extension(Language lang);

/// Accepts the id spelling plus common aliases ("c++", "py", ...), case-insensitive.
std::optional<Language> parse_language(std::string_view text);

}  // namespace transjudge
