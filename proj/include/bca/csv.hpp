#pragma once

#include <string>
#include <vector>

namespace bca {

// RFC-4180-ish CSV: comma separated, optional double-quote quoting with ""
// escapes, \n or \r\n row ends. Returns one vector of cells per row;
// trailing empty line ignored.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

// Quotes a cell only when needed.
std::string csv_escape(const std::string& cell);

// Shortest round-trip decimal representation of a double (std::to_chars).
std::string fmt_double(double v);

std::string trim(const std::string& s);
std::string to_lower(const std::string& s);

// Strict numeric cell parsers; throw DataError on anything but a full
// numeric token.
double parse_double(const std::string& cell);
long long parse_long(const std::string& cell);

}  // namespace bca
