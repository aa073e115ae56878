#pragma once

#include <limits>

namespace stochctm {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

}  // namespace stochctm
