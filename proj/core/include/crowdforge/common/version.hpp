#pragma once

namespace crowdforge {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr double kDayLength = 86400.0;

}  // namespace crowdforge
