#pragma once

namespace robust_kalman {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace robust_kalman
