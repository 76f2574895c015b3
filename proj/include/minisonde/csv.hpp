#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace minisonde::csv {

/// Splits one line on commas. No quoting; none of the formats here need it.
std::vector<std::string_view> split(std::string_view line);

/// Parses a decimal float; throws ParseError naming `context` on failure.
double parse_double(std::string_view field, std::string_view context);

/// Shortest representation that round-trips to the same double.
std::string format_double(double x);

/// Reads a text file as lines with trailing '\r' stripped. Throws IoError.
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Writes `text` to `path`. Throws IoError if the parent directory is missing
/// or the file cannot be opened.
void write_text(const std::filesystem::path& path, const std::string& text);

/// True for blank lines and lines whose first non-space character is '#'.
bool is_comment_or_blank(std::string_view line);

}  // namespace minisonde::csv
