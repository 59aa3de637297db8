#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace magclimb::io {

/// Shortest decimal text that round-trips the value exactly.
std::string format_double(double value);

/// Parses a complete decimal token; throws ConfigError naming `what` on failure.
double parse_double(std::string_view text, std::string_view what);

std::vector<std::string_view> split(std::string_view line, char sep);

std::string read_text(const std::filesystem::path& path);

/// Writes through a temporary sibling and renames, so readers never see a partial file.
void write_text_atomic(const std::filesystem::path& path, std::string_view contents);
void write_bytes_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);

/// 64-bit FNV-1a, used for artifact checksums.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);
std::string hex64(std::uint64_t value);

}  // namespace magclimb::io
