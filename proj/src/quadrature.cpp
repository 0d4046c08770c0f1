#include "regfield/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace regfield {

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
    if (a == b) return 0.0;
    using boost::math::quadrature::gauss_kronrod;
    return gauss_kronrod<double, 61>::integrate(f, a, b, 20, rel_tol);
}

}  // namespace regfield
