#pragma once

namespace sdvar {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace sdvar
