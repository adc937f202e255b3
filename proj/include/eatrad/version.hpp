#pragma once

namespace eatrad {

inline constexpr const char* kToolVersion = "1.0.0";

}  // namespace eatrad
