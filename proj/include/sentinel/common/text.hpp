#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sentinel {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);
std::string to_lower(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);

/// Reads a whole file; throws std::runtime_error when it cannot be opened.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

/// Orders strings treating embedded digit runs as numbers, so that
/// "InternalFunction_2" < "InternalFunction_10".
bool natural_less(std::string_view a, std::string_view b);

}  // namespace sentinel
