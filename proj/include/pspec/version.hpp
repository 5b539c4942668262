#pragma once

namespace pspec {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kFormatVersion = 1;
inline constexpr const char* kRngName = "xoshiro256** (seeded via splitmix64)";

} // namespace pspec
