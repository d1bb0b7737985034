#pragma once

#include <cmath>
#include <numbers>

namespace abstei::normal {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr double kLnSqrt2Pi = 0.91893853320467274178;

inline double pdf(double z) { return std::exp(-0.5 * z * z - kLnSqrt2Pi); }

inline double cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

namespace detail {
// Below this point the tail series replaces erfc.
inline constexpr double kTailCut = -30.0;

// 1 - 1/z^2 + 3/z^4 - 15/z^6 + 105/z^8 - 945/z^10; the Mills tail series for z -> -inf.
inline double tail_series(double z) {
  const double u = 1.0 / (z * z);
  return 1.0 + u * (-1.0 + u * (3.0 + u * (-15.0 + u * (105.0 - 945.0 * u))));
}
}  // namespace detail

/// ln Phi(z), finite for all finite z.
inline double log_cdf(double z) {
  if (z < detail::kTailCut) return -0.5 * z * z - std::log(-z) - kLnSqrt2Pi + std::log(detail::tail_series(z));
  if (z > 5.0) return std::log1p(-0.5 * std::erfc(z * kInvSqrt2));
  return std::log(cdf(z));
}

/// Inverse Mills ratio phi(z) / Phi(z).
inline double mills(double z) {
  if (z < detail::kTailCut) return -z / detail::tail_series(z);
  return std::exp(-0.5 * z * z - kLnSqrt2Pi - log_cdf(z));
}

/// Two-sided p-value of a standard normal statistic.
inline double two_sided_p(double z) { return std::erfc(std::abs(z) * kInvSqrt2); }

}  // namespace abstei::normal
