#pragma once

#include <optional>
#include <string>

namespace couplesim {

// Fixed notation with six significant digits, e.g. 0.123457, 45.8123,
// 1234570; never an exponent. Non-finite values print as nan/inf/-inf.
std::string format_number(double v);

// Undefined statistics print as a dash.
std::string format_stat(const std::optional<double>& v);

// Shortest text that reads back to the identical double.
std::string format_exact(double v);

// Whole-string parse; throws std::invalid_argument naming `what`.
double parse_double(const std::string& s, const std::string& what);

}  // namespace couplesim
