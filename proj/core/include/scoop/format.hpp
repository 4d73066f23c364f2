#pragma once

#include <cstdio>
#include <string>

namespace scoop {

/// Shortest "%g" rendering with the given significant digits ("0.5", "1", "-0.25").
inline std::string format_number(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v == 0.0 ? 0.0 : v);
    return buf;
}

} // namespace scoop
