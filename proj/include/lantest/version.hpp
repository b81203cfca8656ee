#pragma once

namespace lantest {

inline constexpr const char* kVersion = "0.1.0";

} // namespace lantest
