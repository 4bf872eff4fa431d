#pragma once

namespace pwl {

inline constexpr const char* kToolName = "pwl";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace pwl
