#include "regfield/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

namespace regfield {

std::string_view to_string(ScalingKind kind) {
    switch (kind) {
        case ScalingKind::LogLog: return "loglog";
        case ScalingKind::PowerLaw: return "powerlaw";
        case ScalingKind::Constant: return "constant";
    }
    return "unknown";
}

ScalingKind scaling_kind_from_string(std::string_view name) {
    if (name == "loglog") return ScalingKind::LogLog;
    if (name == "powerlaw") return ScalingKind::PowerLaw;
    if (name == "constant") return ScalingKind::Constant;
    throw std::invalid_argument("scaling: unknown kind '" + std::string(name) +
                                "' (expected loglog, powerlaw or constant)");
}

void ScalingFunction::validate() const {
    if (!(c > 0.0) || !std::isfinite(c)) {
        throw std::invalid_argument("scaling: prefactor c must be positive and finite");
    }
    if (kind == ScalingKind::PowerLaw && !(exponent > 0.0 && exponent <= 1.0)) {
        throw std::invalid_argument("scaling: power-law exponent must lie in (0, 1]");
    }
}

double ScalingFunction::eps_upper_bound() const {
    if (kind == ScalingKind::LogLog) return std::exp(-std::numbers::e);
    return std::numeric_limits<double>::infinity();
}

double ScalingFunction::operator()(double eps) const {
    if (!(eps > 0.0) || !std::isfinite(eps)) {
        throw std::domain_error("scaling: eps must be positive and finite");
    }
    switch (kind) {
        case ScalingKind::LogLog: {
            if (!(eps < eps_upper_bound())) {
                std::ostringstream os;
                os << "scaling: loglog schedule needs eps < exp(-e) = " << eps_upper_bound()
                   << ", got " << eps;
                throw std::domain_error(os.str());
            }
            return c / std::log(std::log(1.0 / eps));
        }
        case ScalingKind::PowerLaw: return c * std::pow(eps, exponent);
        case ScalingKind::Constant: return c;
    }
    return c;
}

GrowthReport verify_growth_condition(const ScalingFunction& s, int p, std::span<const double> eps_grid) {
    s.validate();
    if (p < 1) throw std::invalid_argument("scaling: growth exponent p must be >= 1");
    if (eps_grid.size() < 4) throw std::invalid_argument("scaling: eps grid needs at least 4 points");
    for (std::size_t i = 1; i < eps_grid.size(); ++i) {
        if (!(eps_grid[i] < eps_grid[i - 1])) {
            throw std::invalid_argument("scaling: eps grid must be strictly decreasing");
        }
    }
    if (!(eps_grid.front() < 1.0)) throw std::invalid_argument("scaling: eps grid must lie below 1");

    GrowthReport report;
    report.p = p;
    for (double eps : eps_grid) {
        const double h = s(eps);
        const double ratio = std::pow(h, -p) / std::log(1.0 / eps);
        report.samples.push_back({eps, h, ratio});
        report.k_estimate = std::max(report.k_estimate, ratio);
    }

    const std::size_t n = report.samples.size();
    const std::size_t tail_start = n / 2;
    report.satisfied = true;
    for (std::size_t i = tail_start + 1; i < n; ++i) {
        const double prev = report.samples[i - 1].ratio;
        if (report.samples[i].ratio > prev * (1.0 + 1e-12)) {
            report.satisfied = false;
            break;
        }
    }
    return report;
}

std::vector<double> log_spaced_decreasing(double eps_hi, double eps_lo, int n) {
    if (n < 2 || !(eps_lo > 0.0) || !(eps_hi > eps_lo)) {
        throw std::invalid_argument("log_spaced_decreasing: need n >= 2 and 0 < eps_lo < eps_hi");
    }
    std::vector<double> out(static_cast<std::size_t>(n));
    const double a = std::log(eps_hi);
    const double b = std::log(eps_lo);
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (n - 1));
    return out;
}

}  // namespace regfield
