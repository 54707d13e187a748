#pragma once

namespace dvs {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace dvs
