// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace spark::hashing {

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

/// 64-bit FNV-1a. Stable across platforms; used for feature hashing and
/// per-query RNG seeding.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace spark::hashing
