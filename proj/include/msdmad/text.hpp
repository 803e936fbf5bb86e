#pragma once

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

namespace msdmad {

/// Fixed-decimal formatting (locale independent), e.g. fmt_fixed(29.614, 2) == "29.61".
inline std::string fmt_fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return buf;
}

/// Shortest representation that round-trips a double exactly.
inline std::string fmt_double(double value) {
    char buf[64];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, value);
        double back = 0.0;
        std::sscanf(buf, "%lf", &back);
        if (back == value) break;
    }
    return buf;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

template <class It>
std::string join(It begin, It end, const std::string& sep) {
    std::ostringstream os;
    for (It it = begin; it != end; ++it) {
        if (it != begin) os << sep;
        os << *it;
    }
    return os.str();
}

}  // namespace msdmad
