#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace transjudge {

/// Whole-file binary read; throws Error(MissingFile) when absent.
std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temp file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Lines of a JSONL/CSV/text file, without terminators; blank lines dropped.
std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace transjudge
