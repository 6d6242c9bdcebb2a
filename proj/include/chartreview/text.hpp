#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace chartreview {

std::string trim(std::string_view s);
std::string ascii_lower(std::string_view s);

// Trim, ASCII-lowercase and collapse internal whitespace runs to one space.
std::string casefold(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string> split_trimmed(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// FNV-1a, 64 bit.
std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);
std::string content_hash(std::string_view data);

std::string normalize_newlines(std::string_view s);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view data);

// Orders "2" before "10" when both are all digits.
bool natural_less(const std::string& a, const std::string& b);

std::string utc_timestamp();

}  // namespace chartreview
