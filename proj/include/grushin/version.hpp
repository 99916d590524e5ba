#pragma once

namespace grushin {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr int kConfigVersion = 1;

} // namespace grushin
