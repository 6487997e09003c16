#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Small CSV and number-formatting helpers shared by the readers and writers.
namespace hydrofeat::text {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

std::string_view trim(std::string_view s);

/// Splits on newlines, dropping a trailing '\r' per line.
std::vector<std::string_view> split_lines(std::string_view text);

/// Splits one CSV record on commas. Quoting is not supported.
std::vector<std::string_view> split_fields(std::string_view line);

std::optional<double> parse_double(std::string_view s);
std::optional<long> parse_long(std::string_view s);

/// Shortest representation that parses back to the same double; "NA" for NaN.
std::string format_double(double value);

} // namespace hydrofeat::text
