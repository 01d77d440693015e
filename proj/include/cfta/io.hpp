#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace cfta {

// Whole-file read; throws errc::missing_file.
std::string read_file(std::filesystem::path const&);

// Writes to a sibling temporary and renames, so readers never observe a
// partially written file. Creates parent directories.
void write_file_atomic(std::filesystem::path const&, std::string_view content);

// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(std::filesystem::path const&);

}  // namespace cfta
