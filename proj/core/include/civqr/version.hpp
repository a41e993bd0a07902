#pragma once

namespace civqr {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace civqr
