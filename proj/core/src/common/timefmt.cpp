#include "crowdforge/common/timefmt.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace crowdforge {

std::string formatHMS(double seconds) {
    long s = std::lround(seconds);
    bool neg = s < 0;
    if (neg) s = -s;
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%s%02ld:%02ld:%02ld", neg ? "-" : "", s / 3600,
                  (s / 60) % 60, s % 60);
    return buf;
}

double parseTime(const std::string& text) {
    if (text.empty()) throw std::runtime_error("empty time value");
    // Clock form H:MM or H:MM:SS.
    if (text.find(':') != std::string::npos) {
        int h = 0, m = 0, sec = 0;
        int n = std::sscanf(text.c_str(), "%d:%d:%d", &h, &m, &sec);
        if (n < 2 || h < 0 || m < 0 || m > 59 || sec < 0 || sec > 59)
            throw std::runtime_error("bad clock time: " + text);
        return h * 3600.0 + m * 60.0 + sec;
    }
    size_t pos = 0;
    double value;
    try {
        value = std::stod(text, &pos);
    } catch (const std::exception&) {
        throw std::runtime_error("bad time value: " + text);
    }
    if (pos == text.size()) return value;
    std::string suffix = text.substr(pos);
    if (suffix == "h") return value * 3600.0;
    if (suffix == "m") return value * 60.0;
    if (suffix == "s") return value;
    throw std::runtime_error("bad time suffix in: " + text);
}

}  // namespace crowdforge
