#pragma once

#include <string>
#include <string_view>

namespace regfield {

enum class MollifierKind { SymmetricBump, LeftBump, RightBump };

std::string_view to_string(MollifierKind kind);
MollifierKind mollifier_kind_from_string(std::string_view name);

struct Support {
    double lo = -1.0;
    double hi = 1.0;

    double width() const { return hi - lo; }
};

/// Compactly supported smooth bump with unit integral.
///
/// The profile is exp(-1/(1-y^2)) on (-1, 1), mapped affinely onto the
/// support and scaled so that the integral over the real line is one.
/// Values are immutable after construction; evaluation is closed form.
class Mollifier {
public:
    /// Throws std::invalid_argument for empty or non-finite supports and for
    /// one-sided kinds whose support crosses the origin.
    static Mollifier make(MollifierKind kind, Support support);

    MollifierKind kind() const { return kind_; }
    Support support() const { return support_; }

    /// Multiplier applied to the raw bump exp(-1/(1-y^2)).
    double norm_const() const { return norm_const_; }
    /// First moment, integral of x phi(x).
    double moment1() const { return moment1_; }
    /// Integral of |phi'|.
    double l1_norm_deriv() const { return l1_norm_deriv_; }

    double eval(double x) const;
    double eval_deriv(double x) const;

private:
    Mollifier() = default;

    double to_unit(double x) const { return (x - center_) / half_width_; }

    MollifierKind kind_ = MollifierKind::SymmetricBump;
    Support support_{};
    double center_ = 0.0;
    double half_width_ = 1.0;
    double norm_const_ = 0.0;
    double moment1_ = 0.0;
    double l1_norm_deriv_ = 0.0;
};

/// Raw bump exp(-1/(1-y^2)) for |y| < 1, zero elsewhere.
double raw_bump(double y);
/// Derivative of raw_bump.
double raw_bump_deriv(double y);

}  // namespace regfield
