#pragma once

#include <string>

namespace monolip {

/// Shortest round-trip decimal form of a double (std::to_chars).
std::string format_double(double value);

/// Strict double parser; throws std::invalid_argument on trailing garbage.
double parse_double(const std::string& text);

/// Writes via a sibling temp file and renames over the target, so readers
/// never observe a truncated file.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace monolip
