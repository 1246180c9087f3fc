#pragma once

namespace quasifree {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace quasifree
