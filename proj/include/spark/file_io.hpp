// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace spark::io {

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// observe either the old or the new content, never a partial write.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace spark::io
