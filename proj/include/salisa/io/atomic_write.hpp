#pragma once

#include <filesystem>
#include <span>
#include <string_view>

namespace salisa::io {

/// Writes to a sibling temp file and renames it over path.
void write_file_atomic(const std::filesystem::path& path, std::span<const unsigned char> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

std::string read_file(const std::filesystem::path& path);

}  // namespace salisa::io
