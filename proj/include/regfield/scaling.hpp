#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace regfield {

enum class ScalingKind { LogLog, PowerLaw, Constant };

std::string_view to_string(ScalingKind kind);
ScalingKind scaling_kind_from_string(std::string_view name);

/// Schedule h(eps) coupling the mollifier width to the regularization
/// parameter.
///
///   LogLog:   h = c / ln(ln(1/eps)),  eps < exp(-e)
///   PowerLaw: h = c * eps^exponent,   exponent in (0, 1]
///   Constant: h = c
///
/// PowerLaw violates the growth condition and exists as a negative control.
struct ScalingFunction {
    ScalingKind kind = ScalingKind::LogLog;
    double c = 1.0;
    double exponent = 1.0;

    /// Throws std::invalid_argument on bad parameters.
    void validate() const;
    /// Largest admissible eps (exclusive for LogLog), +inf when unrestricted.
    double eps_upper_bound() const;
    /// Throws std::domain_error when eps is outside the admissible range.
    double operator()(double eps) const;
};

struct GrowthSample {
    double eps;
    double h;
    double ratio;  // h^-p / ln(1/eps)
};

struct GrowthReport {
    int p = 1;
    std::vector<GrowthSample> samples;
    double k_estimate = 0.0;
    bool satisfied = false;
};

/// Finite-grid rendering of exp(h^-p) = O(eps^-k): the ratio
/// r(eps) = h(eps)^-p / ln(1/eps) must stay bounded, which is read off as a
/// non-increasing tail over the second half of the grid.
/// eps_grid must be strictly decreasing and admissible with at least 4 points.
GrowthReport verify_growth_condition(const ScalingFunction& s, int p, std::span<const double> eps_grid);

/// n points log-spaced from eps_hi down to eps_lo.
std::vector<double> log_spaced_decreasing(double eps_hi, double eps_lo, int n);

}  // namespace regfield
