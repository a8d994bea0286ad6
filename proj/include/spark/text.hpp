// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace spark::text {

/// Decodes UTF-8 into Unicode scalar values. Invalid sequences decode to
/// U+FFFD one byte at a time, so every input byte string has a decoding.
std::u32string decode_utf8(std::string_view s);

std::string encode_utf8(std::u32string_view s);

bool is_blank(std::string_view line);

std::string_view trim_right(std::string_view s);
std::string_view trim_left(std::string_view s);
std::string_view trim(std::string_view s);

/// Splits on '\n', dropping a trailing '\r' from each piece. A trailing
/// newline does not produce an extra empty line.
std::vector<std::string> split_lines(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace spark::text
