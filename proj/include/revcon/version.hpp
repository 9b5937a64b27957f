#pragma once

namespace revcon {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace revcon
