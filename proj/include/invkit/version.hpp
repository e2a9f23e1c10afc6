#pragma once

namespace invkit {

inline constexpr const char* kVersion = "0.1.0";

} // namespace invkit
