#pragma once

// Minimal CSV helpers: comma-separated, no quoting, locale-independent
// number parsing.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace hicrit::csv {

std::vector<std::string> split_line(std::string_view line);

/// Parses a finite double; throws ValidationError naming `where` otherwise.
double parse_double(std::string_view text, std::string_view where);

/// Shortest round-trip representation.
std::string exact(double value);

/// Writes `contents` to a sibling temp file and renames it over `path`.
void atomic_write(const std::filesystem::path& path, const std::string& contents);

std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace hicrit::csv
