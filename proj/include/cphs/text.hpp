#pragma once

#include <cstdio>
#include <string>
#include <vector>

namespace cphs {

// Shortest representation that round-trips a double exactly.
inline std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace cphs
