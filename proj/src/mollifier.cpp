#include "regfield/mollifier.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "regfield/quadrature.hpp"

namespace regfield {

std::string_view to_string(MollifierKind kind) {
    switch (kind) {
        case MollifierKind::SymmetricBump: return "symmetric";
        case MollifierKind::LeftBump: return "left";
        case MollifierKind::RightBump: return "right";
    }
    return "unknown";
}

MollifierKind mollifier_kind_from_string(std::string_view name) {
    if (name == "symmetric") return MollifierKind::SymmetricBump;
    if (name == "left") return MollifierKind::LeftBump;
    if (name == "right") return MollifierKind::RightBump;
    throw std::invalid_argument("mollifier: unknown kind '" + std::string(name) +
                                "' (expected symmetric, left or right)");
}

double raw_bump(double y) {
    const double s = 1.0 - y * y;
    if (s <= 0.0) return 0.0;
    return std::exp(-1.0 / s);
}

double raw_bump_deriv(double y) {
    const double s = 1.0 - y * y;
    if (s <= 0.0) return 0.0;
    return std::exp(-1.0 / s) * (-2.0 * y / (s * s));
}

Mollifier Mollifier::make(MollifierKind kind, Support support) {
    std::ostringstream why;
    if (!std::isfinite(support.lo) || !std::isfinite(support.hi)) {
        why << "mollifier: support must be bounded, got [" << support.lo << ", " << support.hi << "]";
    } else if (!(support.lo < support.hi)) {
        why << "mollifier: support must be nonempty, got [" << support.lo << ", " << support.hi << "]";
    } else if (kind == MollifierKind::LeftBump && support.hi > 0.0) {
        why << "mollifier: left bump needs s_hi <= 0, got s_hi = " << support.hi;
    } else if (kind == MollifierKind::RightBump && support.lo < 0.0) {
        why << "mollifier: right bump needs s_lo >= 0, got s_lo = " << support.lo;
    }
    if (!why.str().empty()) throw std::invalid_argument(why.str());

    Mollifier m;
    m.kind_ = kind;
    m.support_ = support;
    m.center_ = 0.5 * (support.lo + support.hi);
    m.half_width_ = 0.5 * (support.hi - support.lo);

    const double raw_mass = integrate([&](double x) { return raw_bump(m.to_unit(x)); },
                                      support.lo, support.hi);
    m.norm_const_ = 1.0 / raw_mass;
    m.moment1_ = integrate([&](double x) { return x * m.eval(x); }, support.lo, support.hi);
    // phi' changes sign only at the center of the bump
    const auto abs_deriv = [&](double x) { return std::abs(m.eval_deriv(x)); };
    m.l1_norm_deriv_ = integrate(abs_deriv, support.lo, m.center_) +
                       integrate(abs_deriv, m.center_, support.hi);
    return m;
}

double Mollifier::eval(double x) const {
    if (x <= support_.lo || x >= support_.hi) return 0.0;
    return norm_const_ * raw_bump(to_unit(x));
}

double Mollifier::eval_deriv(double x) const {
    if (x <= support_.lo || x >= support_.hi) return 0.0;
    return norm_const_ * raw_bump_deriv(to_unit(x)) / half_width_;
}

}  // namespace regfield
