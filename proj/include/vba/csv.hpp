#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace vba::csv {

/// Decimal, 17 significant digits, '.' separator; round-trips every double.
std::string number(double value);

std::vector<std::string> split(std::string_view line, char sep = ',');

/// Strict parse: the whole field must be a number. Returns false otherwise.
bool parse_number(std::string_view field, double& out);

std::string trim(std::string_view s);

/// Writes one row, LF-terminated.
void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace vba::csv
