#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace alforge {

/// `key = value` per line; `#` starts a comment; blank lines ignored.
/// Duplicate keys and lines without `=` are data errors.
std::map<std::string, std::string> parse_key_values(std::string_view text, std::string_view origin);
std::map<std::string, std::string> read_key_value_file(const std::filesystem::path& path);

std::string trim(std::string_view text);

}  // namespace alforge
