#include "regfield/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "regfield/nonlinearity.hpp"

namespace regfield {

VelocityField::VelocityField(const SpacetimeSolution& sol) : sol_(&sol) {
    if (sol.states.size() < 2) throw std::invalid_argument("trajectories: solution needs at least two saved states");
    if (!(sol.times.back() > sol.times.front())) {
        throw std::invalid_argument("trajectories: world lines need a forward-in-time solution");
    }
}

bool VelocityField::contains(double t, double x) const {
    return t >= t_min() && t <= t_max() && x >= sol_->grid.x_min && x <= sol_->grid.x_max;
}

double VelocityField::operator()(double t, double x) const {
    if (!contains(t, x)) {
        std::ostringstream os;
        os << "trajectories: point (" << t << ", " << x << ") outside the solution window";
        throw std::out_of_range(os.str());
    }
    const auto& times = sol_->times;
    auto it = std::upper_bound(times.begin(), times.end(), t);
    std::size_t k = it == times.begin() ? 0 : static_cast<std::size_t>(it - times.begin()) - 1;
    k = std::min(k, times.size() - 2);
    const double ft = (t - times[k]) / (times[k + 1] - times[k]);

    const Grid& g = sol_->grid;
    const double pos = (x - g.x_min) / g.dx();
    auto i = static_cast<std::size_t>(std::max(0.0, std::floor(pos)));
    i = std::min(i, g.n - 2);
    const double fx = pos - static_cast<double>(i);

    const auto& a = sol_->states[k].u;
    const auto& b = sol_->states[k + 1].u;
    const double lower = (1.0 - fx) * a[i] + fx * a[i + 1];
    const double upper = (1.0 - fx) * b[i] + fx * b[i + 1];
    return (1.0 - ft) * lower + ft * upper;
}

Trajectory integrate_world_line(const SpacetimeSolution& sol, double t0, double x0, double r_end, double dr) {
    const VelocityField field(sol);
    if (!field.contains(t0, x0)) {
        std::ostringstream os;
        os << "trajectories: start (" << t0 << ", " << x0 << ") outside the solution window";
        throw std::invalid_argument(os.str());
    }
    if (!(r_end > t0)) throw std::invalid_argument("trajectories: r_end must exceed the start time");
    if (!(dr > 0.0)) throw std::invalid_argument("trajectories: dr must be positive");

    Trajectory traj;
    traj.t0 = t0;
    traj.x0 = x0;
    traj.r.push_back(t0);
    traj.w.push_back(x0);

    const auto steps = std::max(1L, static_cast<long>(std::ceil((r_end - t0) / dr - 1e-9)));
    const double h = (r_end - t0) / static_cast<double>(steps);
    const auto velocity = [&](double r, double w) -> std::optional<double> {
        if (!field.contains(r, w)) return std::nullopt;
        return nonlinearity::a(field(r, w));
    };

    double w = x0;
    for (long s = 0; s < steps; ++s) {
        const double r = t0 + static_cast<double>(s) * h;
        const auto k1 = velocity(r, w);
        const auto k2 = k1 ? velocity(r + 0.5 * h, w + 0.5 * h * *k1) : std::nullopt;
        const auto k3 = k2 ? velocity(r + 0.5 * h, w + 0.5 * h * *k2) : std::nullopt;
        const auto k4 = k3 ? velocity(r + h, w + h * *k3) : std::nullopt;
        if (!k4) {
            traj.exited = true;
            break;
        }
        w += h / 6.0 * (*k1 + 2.0 * *k2 + 2.0 * *k3 + *k4);
        traj.r.push_back(t0 + static_cast<double>(s + 1) * h);
        traj.w.push_back(w);
    }
    return traj;
}

double max_speed(const Trajectory& traj) {
    double worst = 0.0;
    for (std::size_t k = 1; k < traj.r.size(); ++k) {
        worst = std::max(worst, std::abs(traj.w[k] - traj.w[k - 1]) / (traj.r[k] - traj.r[k - 1]));
    }
    return worst;
}

ParametrizedPath integrate_parametrized(const SpacetimeSolution& sol, double t0, double x0, double r_end,
                                        double ds) {
    const VelocityField field(sol);
    if (!field.contains(t0, x0)) throw std::invalid_argument("trajectories: start outside the solution window");
    if (!(ds > 0.0)) throw std::invalid_argument("trajectories: ds must be positive");

    struct Rate {
        double dz0, dz1;
    };
    const auto rate = [&](double z0, double z1) -> std::optional<Rate> {
        if (!field.contains(z0, z1)) return std::nullopt;
        const double u = field(z0, z1);
        return Rate{nonlinearity::sqrt1p_sq(u), u};
    };

    ParametrizedPath path;
    double s = 0.0, z0 = t0, z1 = x0;
    const auto record = [&]() {
        path.s.push_back(s);
        path.z0.push_back(z0);
        path.z1.push_back(z1);
        path.slope.push_back(nonlinearity::a(field(z0, z1)));
    };
    record();
    while (z0 < r_end) {
        const auto k1 = rate(z0, z1);
        const auto k2 = k1 ? rate(z0 + 0.5 * ds * k1->dz0, z1 + 0.5 * ds * k1->dz1) : std::nullopt;
        const auto k3 = k2 ? rate(z0 + 0.5 * ds * k2->dz0, z1 + 0.5 * ds * k2->dz1) : std::nullopt;
        const auto k4 = k3 ? rate(z0 + ds * k3->dz0, z1 + ds * k3->dz1) : std::nullopt;
        if (!k4) {
            path.exited = true;
            break;
        }
        const double nz0 = z0 + ds / 6.0 * (k1->dz0 + 2.0 * k2->dz0 + 2.0 * k3->dz0 + k4->dz0);
        const double nz1 = z1 + ds / 6.0 * (k1->dz1 + 2.0 * k2->dz1 + 2.0 * k3->dz1 + k4->dz1);
        if (!field.contains(nz0, nz1)) {
            path.exited = true;
            break;
        }
        s += ds;
        z0 = nz0;
        z1 = nz1;
        record();
    }
    return path;
}

double reparametrization_mismatch(const Trajectory& traj, const ParametrizedPath& path) {
    double worst = 0.0;
    std::size_t k = 0;
    for (std::size_t j = 0; j < traj.r.size(); ++j) {
        const double r = traj.r[j];
        while (k + 1 < path.z0.size() && path.z0[k + 1] < r) ++k;
        if (k + 1 >= path.z0.size() || r < path.z0[k]) continue;
        const double H = path.z0[k + 1] - path.z0[k];
        const double tau = (r - path.z0[k]) / H;
        const double t2 = tau * tau, t3 = t2 * tau;
        const double z1 = (2 * t3 - 3 * t2 + 1) * path.z1[k] + (t3 - 2 * t2 + tau) * H * path.slope[k] +
                          (-2 * t3 + 3 * t2) * path.z1[k + 1] + (t3 - t2) * H * path.slope[k + 1];
        worst = std::max(worst, std::abs(z1 - traj.w[j]));
    }
    return worst;
}

}  // namespace regfield
