#pragma once

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <numbers>

#include "tailray/errors.hpp"

namespace tailray::normal {

inline double pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

inline double cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Upper tail 1 - Phi(z), accurate far into the tail.
inline double upper_tail(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

/// log(1 - Phi(z)); switches to the asymptotic Mills-ratio series once erfc underflows.
inline double log_upper_tail(double z) {
  if (z < 30.0) return std::log(upper_tail(z));
  const double r = 1.0 / (z * z);
  const double series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)));
  return -0.5 * z * z - std::log(z) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

/// z with 1 - Phi(z) = exp(log_p).
inline double upper_quantile_log(double log_p) {
  if (!(log_p <= 0.0)) throw DomainError("upper_quantile_log: log probability must be <= 0");
  if (log_p == 0.0) return -std::numeric_limits<double>::infinity();
  if (log_p > -700.0) {
    const boost::math::normal_distribution<double> n01;
    return boost::math::quantile(boost::math::complement(n01, std::exp(log_p)));
  }
  // Newton on log Q(z) = log_p; d/dz log Q = -phi/Q.
  double z = std::sqrt(-2.0 * log_p);
  for (int it = 0; it < 100; ++it) {
    const double f = log_upper_tail(z) - log_p;
    // phi(z)/Q(z) from the same asymptotic series.
    const double r = 1.0 / (z * z);
    const double hazard = z / (1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r)));
    const double step = f / hazard;
    z += step;
    if (std::abs(step) < 1e-15 * z) return z;
  }
  throw NumericError("upper_quantile_log: Newton iteration did not converge");
}

}  // namespace tailray::normal
