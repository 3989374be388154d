#pragma once

namespace bmp {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace bmp
