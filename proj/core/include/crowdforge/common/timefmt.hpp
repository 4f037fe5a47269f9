#pragma once

#include <string>

namespace crowdforge {

// Seconds-of-day -> "HH:MM:SS".
std::string formatHMS(double seconds);

// Parses a time-of-day or duration: "8h", "30m", "90s", "7:30", "7:30:15",
// or a plain number of seconds ("28800", "0.5"). Suffixes may be combined
// with a decimal value ("1.5h"). Throws std::runtime_error on bad input.
double parseTime(const std::string& text);

}  // namespace crowdforge
