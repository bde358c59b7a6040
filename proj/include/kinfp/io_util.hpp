#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace kinfp {

// Writes to a sibling temporary file and renames it into place, so readers
// never see a partial file. Throws std::runtime_error on failure.
void atomic_write(const std::filesystem::path& path, std::string_view bytes);

std::string read_file(const std::filesystem::path& path);

}  // namespace kinfp
