#include "regfield/deltanet.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace regfield {

namespace {

const Mollifier& unit_bump() {
    static const Mollifier m = Mollifier::make(MollifierKind::SymmetricBump, {-1.0, 1.0});
    return m;
}

}  // namespace

std::string_view to_string(NetAnchor anchor) {
    switch (anchor) {
        case NetAnchor::Centered: return "centered";
        case NetAnchor::Left: return "left";
        case NetAnchor::Right: return "right";
    }
    return "unknown";
}

NetAnchor net_anchor_from_string(std::string_view name) {
    if (name == "centered") return NetAnchor::Centered;
    if (name == "left") return NetAnchor::Left;
    if (name == "right") return NetAnchor::Right;
    throw std::invalid_argument("deltanet: unknown anchor '" + std::string(name) +
                                "' (expected centered, left or right)");
}

double WidthRule::operator()(double eps) const {
    if (!(eps > 0.0)) throw std::domain_error("deltanet: eps must be positive");
    return factor * std::pow(eps, power);
}

Support DeltaNet::support(double eps) const {
    const double w = width(eps);
    switch (anchor) {
        case NetAnchor::Centered: return {center - w, center + w};
        case NetAnchor::Left: return {center - 2.0 * w, center};
        case NetAnchor::Right: return {center, center + 2.0 * w};
    }
    return {center - w, center + w};
}

double DeltaNet::density(double eps, double x) const {
    const Support s = support(eps);
    const double half = 0.5 * s.width();
    const double mid = 0.5 * (s.lo + s.hi);
    return unit_bump().eval((x - mid) / half) / half;
}

std::vector<double> sample(const DeltaNet& net, double eps, const Grid& grid) {
    grid.validate();
    const double w = net.width(eps);
    const double dx = grid.dx();
    if (!(w >= 4.0 * dx * (1.0 - 1e-12))) {
        std::ostringstream os;
        os << "deltanet: profile half-width w = " << w << " is under-resolved on dx = " << dx
           << "; refine the grid before shrinking eps";
        throw std::invalid_argument(os.str());
    }
    const Support s = net.support(eps);
    if (s.lo < grid.x_min || s.hi > grid.x_max) {
        std::ostringstream os;
        os << "deltanet: support [" << s.lo << ", " << s.hi << "] leaves the grid [" << grid.x_min << ", "
           << grid.x_max << "]";
        throw std::invalid_argument(os.str());
    }
    std::vector<double> out(grid.n, 0.0);
    if (net.mass == 0.0) return out;
    for (std::size_t i = 0; i < grid.n; ++i) out[i] = net.density(eps, grid.x(i));
    const double grid_mass = trapezoid(out, dx);
    const double scale = net.mass / grid_mass;
    for (double& v : out) v *= scale;
    return out;
}

StrictNetReport verify_strict(const NetFamily& family, std::span<const double> eps_schedule, const Grid& grid,
                              double abs_mass_bound) {
    StrictNetReport report;
    const double dx = grid.dx();
    for (double eps : eps_schedule) {
        NetMember member = family(eps);
        std::vector<double> abs_values(member.values.size());
        for (std::size_t i = 0; i < abs_values.size(); ++i) abs_values[i] = std::abs(member.values[i]);
        report.rows.push_back({eps, member.support.width(), trapezoid(member.values, dx), trapezoid(abs_values, dx)});
    }

    report.supports_shrink = !report.rows.empty();
    report.unit_mass = true;
    report.bounded_abs_mass = true;
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const auto& row = report.rows[i];
        if (i > 0 && !(row.support_width < report.rows[i - 1].support_width)) report.supports_shrink = false;
        if (!(std::abs(row.mass - 1.0) <= 1e-8)) report.unit_mass = false;
        if (!(row.abs_mass <= abs_mass_bound * (1.0 + 1e-8))) report.bounded_abs_mass = false;
    }
    return report;
}

StrictNetReport verify_strict(const DeltaNet& net, std::span<const double> eps_schedule, const Grid& grid) {
    DeltaNet unit = net;
    unit.mass = 1.0;
    const NetFamily family = [&](double eps) {
        NetMember m;
        m.support = unit.support(eps);
        m.values.resize(grid.n);
        for (std::size_t i = 0; i < grid.n; ++i) m.values[i] = unit.density(eps, grid.x(i));
        return m;
    };
    return verify_strict(family, eps_schedule, grid, 1.0);
}

}  // namespace regfield
