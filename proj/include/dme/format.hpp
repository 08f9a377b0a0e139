#pragma once

#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace dme {

// Shortest decimal form that round-trips a double exactly (17 significant
// digits is always enough for IEEE-754 binary64).
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& text) {
    const char* begin = text.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin)
        throw std::invalid_argument("parse_double: not a number: '" + text + "'");
    return v;
}

}  // namespace dme
