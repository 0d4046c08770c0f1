#pragma once

#include <cmath>
#include <stdexcept>

namespace regfield::nonlinearity {

namespace detail {
inline void require_finite(double y) {
    if (!std::isfinite(y)) throw std::domain_error("nonlinearity: non-finite argument");
}
}  // namespace detail

/// sqrt(1 + y^2) without overflow for large |y|.
inline double sqrt1p_sq(double y) {
    detail::require_finite(y);
    return std::hypot(1.0, y);
}

/// sqrt(1 + y^2) - 1, free of cancellation near y = 0 and exactly zero at y = 0.
inline double sqrt1p_sq_minus_one(double y) {
    detail::require_finite(y);
    const double r = std::hypot(1.0, y);
    if (std::abs(y) > 1.0) return r - 1.0;
    return y * y / (1.0 + r);
}

/// Relativistic velocity map a(y) = y / sqrt(1 + y^2); |a| < 1.
inline double a(double y) {
    detail::require_finite(y);
    return y / std::hypot(1.0, y);
}

/// a'(y) = (1 + y^2)^(-3/2), in (0, 1].
inline double a_prime(double y) {
    detail::require_finite(y);
    const double inv = 1.0 / std::hypot(1.0, y);
    return inv * inv * inv;
}

}  // namespace regfield::nonlinearity
