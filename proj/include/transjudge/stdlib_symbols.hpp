#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "transjudge/language.hpp"

namespace transjudge {

/// Import line that makes `symbol` available in `lang` using only the
/// standard library, e.g. Scanner -> "import java.util.Scanner;",
/// sqrt -> "from math import sqrt", cout -> "#include <iostream>".
std::optional<std::string> import_for_symbol(Language lang, std::string_view symbol);

/// Every symbol the table knows for `lang`, sorted.
std::vector<std::string> known_symbols(Language lang);

/// True when `code` already contains an import/include that provides `symbol`.
bool has_import_for(std::string_view code, Language lang, std::string_view symbol);

}  // namespace transjudge
