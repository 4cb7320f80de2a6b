#pragma once

#include <string>
#include <string_view>

namespace transjudge {

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

/// Cassette key: SHA-256 over backend name, a NUL separator, then the prompt.
std::string request_digest(std::string_view backend_name, std::string_view prompt_text);

}  // namespace transjudge
