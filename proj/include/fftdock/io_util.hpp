#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fftdock {

// Writes to a sibling temp file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

// Non-empty, non-comment ('#') lines with surrounding blanks removed.
std::vector<std::string> read_list_file(const std::filesystem::path& path);

std::vector<std::string> split_tabs(std::string_view line);

}  // namespace fftdock
