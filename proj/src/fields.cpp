#include "regfield/fields.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "regfield/nonlinearity.hpp"

namespace regfield {

void Grid::validate() const {
    if (!(x_min < x_max) || !std::isfinite(x_min) || !std::isfinite(x_max)) {
        std::ostringstream os;
        os << "grid: need finite x_min < x_max, got [" << x_min << ", " << x_max << "]";
        throw std::invalid_argument(os.str());
    }
    if (n < 16) throw std::invalid_argument("grid: need at least 16 points, got " + std::to_string(n));
}

Grid Grid::with_spacing(double x_min, double x_max, double dx_max) {
    if (!(dx_max > 0.0)) throw std::invalid_argument("grid: spacing must be positive");
    const auto cells = static_cast<std::size_t>(std::ceil((x_max - x_min) / dx_max - 1e-9));
    Grid g{x_min, x_max, std::max<std::size_t>(cells + 1, 16)};
    g.validate();
    return g;
}

std::string_view to_string(RunStatus status) {
    switch (status) {
        case RunStatus::Clean: return "clean";
        case RunStatus::GuardAbort: return "guard_abort";
        case RunStatus::Overflow: return "overflow";
        case RunStatus::BoundaryContaminated: return "boundary_contaminated";
    }
    return "unknown";
}

FieldState FieldState::zeros(const Grid& g, double t) {
    FieldState s;
    s.t = t;
    s.E.assign(g.n, 0.0);
    s.u.assign(g.n, 0.0);
    s.sigma.assign(g.n, 0.0);
    return s;
}

bool FieldState::all_finite() const {
    const auto finite = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    return std::isfinite(t) && finite(E) && finite(u) && finite(sigma);
}

double FieldState::sup_norm() const {
    double m = 0.0;
    for (const auto* v : {&E, &u, &sigma}) {
        for (double x : *v) m = std::max(m, std::abs(x));
    }
    return m;
}

void SpacetimeSolution::push(FieldState state) {
    times.push_back(state.t);
    states.push_back(std::move(state));
}

void SpacetimeSolution::check_consistency() const {
    if (times.size() != states.size()) throw std::logic_error("solution: times and states misaligned");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (states[i].t != times[i]) throw std::logic_error("solution: state time differs from time axis");
        if (states[i].size() != grid.n) throw std::logic_error("solution: state length differs from grid");
    }
    if (times.size() < 2) return;
    const bool forward = times[1] > times[0];
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (forward ? !(times[i] > times[i - 1]) : !(times[i] < times[i - 1])) {
            throw std::logic_error("solution: times not strictly monotone");
        }
    }
}

double restrict_velocity_norm(const FieldState& state) {
    double worst = 0.0;
    for (double u : state.u) {
        const double r = nonlinearity::sqrt1p_sq(u);
        worst = std::max(worst, std::abs((1.0 + u * u) - r * r));
    }
    return worst;
}

double trapezoid(std::span<const double> f, double dx) {
    if (f.empty()) return 0.0;
    double s = 0.0;
    for (double v : f) s += v;
    s -= 0.5 * (f.front() + f.back());
    return s * dx;
}

double total_charge(const FieldState& state, const Grid& grid) {
    return trapezoid(state.sigma, grid.dx());
}

bool boundary_contaminated(const FieldState& state) {
    const std::size_t n = state.size();
    if (n == 0) return false;
    const std::size_t edge = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(0.05 * n)));
    const auto magnitude = [&](std::size_t i) {
        return std::abs(state.E[i]) + std::abs(state.u[i]) + std::abs(state.sigma[i]);
    };
    double interior = 0.0;
    for (std::size_t i = edge; i + edge < n; ++i) interior = std::max(interior, magnitude(i));
    double outer = 0.0;
    for (std::size_t i = 0; i < edge && i < n; ++i) {
        outer = std::max(outer, magnitude(i));
        outer = std::max(outer, magnitude(n - 1 - i));
    }
    return outer > 1e-8 * interior;
}

}  // namespace regfield
