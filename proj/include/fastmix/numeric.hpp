#pragma once

#include <cmath>
#include <cstdint>

namespace fastmix {

/// Ceiling that forgives round-off just above an integer, so that a value
/// like ln 32 / ln 2 = 5.000000000000001 counts as 5.
inline std::int64_t ceil_count(double x) {
  const double slack = 1e-9 * std::fmax(1.0, std::fabs(x));
  return static_cast<std::int64_t>(std::ceil(x - slack));
}

/// Logistic function 1 / (1 + e^{-z}).
inline double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace fastmix
