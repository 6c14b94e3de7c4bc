// format.hpp — Locale-independent numeric formatting for tables (12
// significant digits, '.' decimal separator).

#pragma once

#include <cstdio>
#include <string>

namespace qtm {

inline std::string format_number(double value) {
    if (value == 0.0) value = 0.0;  // collapse negative zero
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.12g", value);
    return buffer;
}

} // namespace qtm
