#pragma once

namespace oscd {

inline constexpr const char* kToolVersion = "0.1.0";

} // namespace oscd
