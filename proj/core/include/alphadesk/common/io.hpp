#pragma once

#include <string>
#include <vector>

namespace alphadesk {

/// Whole file as one string. Throws DataError if unreadable.
std::string read_file(const std::string& path);

/// Writes via a temp file in the same directory plus rename, so an
/// interrupted run never leaves a truncated artifact behind.
void write_file_atomic(const std::string& path, const std::string& content);

/// Splits on '\n', dropping a trailing '\r' per line and a final empty line.
std::vector<std::string> split_lines(const std::string& text);

/// Splits a line on commas. No quoting: none of the engine's formats needs it.
std::vector<std::string> split_csv(const std::string& line);

/// Splits on `sep`; items are trimmed of surrounding spaces and tabs, and
/// empty items are preserved.
std::vector<std::string> split_list(const std::string& text, char sep);

}  // namespace alphadesk
