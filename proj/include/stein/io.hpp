#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace stein {

/// Library version string.
const char* version();

/// Locale-independent, round-trip formatting with 17 significant digits.
std::string format_double(double v);

/// Writes a header row and data rows; cells are joined with ','.
void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace stein
