#pragma once

namespace graphdist {

inline constexpr const char* version = "0.1.0";

} // namespace graphdist
