#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace trendvol::text {

/// Splits on `sep`, keeping empty fields.
std::vector<std::string_view> split(std::string_view line, char sep);

std::string_view trim(std::string_view s);

/// Lines without terminators; a trailing `\r` is dropped.
std::vector<std::string_view> lines(std::string_view text);

/// Strict full-field parse; no leading/trailing garbage.
bool parse_double(std::string_view field, double& out);

/// Shortest representation that round-trips exactly.
std::string format_double(double value);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace trendvol::text
