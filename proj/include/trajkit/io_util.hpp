#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace trajkit {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Empty string for a missing value (CSV null).
std::string format_optional(const std::optional<double>& value);

/// Whole-token parse; nullopt on trailing garbage or an empty token.
std::optional<double> parse_double(std::string_view token);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string to_hex(std::uint64_t value);

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace trajkit
