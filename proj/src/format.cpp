#include "couplesim/format.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace couplesim {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0.00000";
    // round to six significant digits first so that 9.999996 becomes 10.0000
    char sci[32];
    std::snprintf(sci, sizeof sci, "%.5e", v);
    const double r = std::strtod(sci, nullptr);
    const int exponent = static_cast<int>(std::floor(std::log10(std::abs(r))));
    const int decimals = std::max(0, 5 - exponent);
    char buf[400];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, r);
    std::string out = buf;
    if (out == "-0" || out.find_first_not_of("-0.") == std::string::npos) out.erase(0, out[0] == '-');
    return out;
}

std::string format_stat(const std::optional<double>& v) { return v ? format_number(*v) : "-"; }

std::string format_exact(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

double parse_double(const std::string& s, const std::string& what) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    const auto r = std::from_chars(first, last, v);
    if (r.ec != std::errc() || r.ptr != last || first == last)
        throw std::invalid_argument("'" + what + "' is not a number: '" + s + "'");
    return v;
}

}  // namespace couplesim
