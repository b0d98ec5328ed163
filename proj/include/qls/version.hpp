#pragma once

namespace qls {

inline constexpr const char* kVersion = "0.1.0";

} // namespace qls
