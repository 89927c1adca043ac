#pragma once

namespace swave {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace swave
