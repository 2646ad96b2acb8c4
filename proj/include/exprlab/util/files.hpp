#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace exprlab {

// Writes through a temporary sibling file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace exprlab
