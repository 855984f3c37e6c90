#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace gdistill {

/// 64-bit FNV-1a; stable across platforms and runs.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state = 0xcbf29ce484222325ull);

/// FNV-1a of a file's bytes as 16 hex digits.
std::string hash_file(const std::filesystem::path& file);

std::string to_hex(std::uint64_t v);

}  // namespace gdistill
