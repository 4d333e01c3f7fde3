#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace midec {

// Locale-independent number formatting (shortest round-trip form).
std::string num_to_string(double v);
std::string num_to_string(float v);
// Fixed number of decimals, for the aligned text tables.
std::string num_fixed(double v, int decimals);

// Parse a floating point cell; returns false on any trailing garbage.
bool parse_number(const std::string& s, double& out);

// Split one CSV record on commas. No quoting support; fields are trimmed
// of surrounding whitespace and a trailing CR is dropped.
std::vector<std::string> split_csv_line(const std::string& line);

// Write a file atomically (temp file in the same directory + rename).
void write_file_atomic(const std::string& path, const std::string& contents);

std::string read_file(const std::string& path);

} // namespace midec
