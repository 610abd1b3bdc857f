#pragma once

namespace n2k {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kToolName = "n2k";

}  // namespace n2k
