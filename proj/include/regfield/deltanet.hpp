#pragma once

#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "regfield/fields.hpp"
#include "regfield/mollifier.hpp"

namespace regfield {

/// Where the support of rho^eps sits relative to the center point.
enum class NetAnchor {
    Centered,  // [c - w, c + w]
    Left,      // [c - 2w, c]
    Right,     // [c, c + 2w]
};

std::string_view to_string(NetAnchor anchor);
NetAnchor net_anchor_from_string(std::string_view name);

/// w(eps) = factor * eps^power, the support half-width.
struct WidthRule {
    double factor = 1.0;
    double power = 1.0;

    double operator()(double eps) const;
};

/// Strict delta net built from the symmetric bump: rho^eps has support of
/// half-width w(eps), unit integral and is nonnegative.
struct DeltaNet {
    double center = 0.0;
    NetAnchor anchor = NetAnchor::Centered;
    WidthRule width{};
    double mass = 1.0;  // q

    Support support(double eps) const;
    /// Unit-mass profile rho^eps(x), closed form.
    double density(double eps, double x) const;
};

/// q * rho^eps on the grid, rescaled so its trapezoidal mass is exactly q.
/// Throws std::invalid_argument when w(eps) < 4 dx or the support leaves
/// the grid.
std::vector<double> sample(const DeltaNet& net, double eps, const Grid& grid);

/// One member of an eps-family as seen on a grid.
struct NetMember {
    Support support{};
    std::vector<double> values;
};

using NetFamily = std::function<NetMember(double eps)>;

struct StrictNetRow {
    double eps;
    double support_width;
    double mass;
    double abs_mass;
};

struct StrictNetReport {
    std::vector<StrictNetRow> rows;
    bool supports_shrink = false;
    bool unit_mass = false;
    bool bounded_abs_mass = false;

    bool pass() const { return supports_shrink && unit_mass && bounded_abs_mass; }
};

/// Checks the strict-delta-net conditions along a decreasing eps schedule.
/// Unit mass is tested to 1e-8; absolute mass against abs_mass_bound.
StrictNetReport verify_strict(const NetFamily& family, std::span<const double> eps_schedule,
                              const Grid& grid, double abs_mass_bound = 1.0);
StrictNetReport verify_strict(const DeltaNet& net, std::span<const double> eps_schedule, const Grid& grid);

}  // namespace regfield
