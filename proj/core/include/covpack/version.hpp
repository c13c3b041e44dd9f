#pragma once

namespace covpack {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace covpack
