#pragma once

#include <functional>

namespace regfield {

/// Adaptive Gauss-Kronrod (61-point) integral of f over [a, b].
/// Relative tolerance defaults to 1e-12; a and b must be finite.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-12);

}  // namespace regfield
