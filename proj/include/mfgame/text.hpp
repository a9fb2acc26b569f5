#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mfgame::text {

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

// Strict parse: the whole field must be consumed. Throws ParseError naming `what`.
double parse_double(std::string_view field, std::string_view what);
unsigned long long parse_unsigned(std::string_view field, std::string_view what);

std::vector<std::string_view> split(std::string_view line, char delim);
std::string_view trim(std::string_view s);

}  // namespace mfgame::text
