#pragma once

namespace gshap {
inline constexpr const char* kVersion = "0.1.0";
}  // namespace gshap
