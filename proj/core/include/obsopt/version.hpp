#pragma once

namespace obsopt {

inline constexpr const char* version = "0.1.0";

} // namespace obsopt
