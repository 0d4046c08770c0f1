#pragma once

#include <vector>

#include "regfield/fields.hpp"

namespace regfield {

/// Bilinear interpolation of u(t, x) from the saved states of a forward run.
class VelocityField {
public:
    explicit VelocityField(const SpacetimeSolution& sol);

    bool contains(double t, double x) const;
    /// Throws std::out_of_range outside the window.
    double operator()(double t, double x) const;

    double t_min() const { return sol_->times.front(); }
    double t_max() const { return sol_->times.back(); }

private:
    const SpacetimeSolution* sol_;
};

/// Sampled world line x = w(r) through (t0, x0), solving w' = a(u(r, w)).
struct Trajectory {
    double t0 = 0.0;
    double x0 = 0.0;
    std::vector<double> r;
    std::vector<double> w;
    /// True when integration stopped because the path left the window.
    bool exited = false;
};

/// RK4 in r with step dr (realized as (r_end - t0) / ceil((r_end - t0) / dr)).
/// Throws std::invalid_argument when the start lies outside the window or
/// r_end <= t0.
Trajectory integrate_world_line(const SpacetimeSolution& sol, double t0, double x0, double r_end, double dr);

/// max |w(r_{k+1}) - w(r_k)| / (r_{k+1} - r_k).
double max_speed(const Trajectory& traj);

struct ParametrizedPath {
    std::vector<double> s;
    std::vector<double> z0;  // time coordinate
    std::vector<double> z1;  // space coordinate
    std::vector<double> slope;  // dz1/dz0 = a(u) at each node
    bool exited = false;
};

/// RK4 for z0' = sqrt(1 + u^2), z1' = u in the curve parameter s, until
/// z0 reaches r_end.
ParametrizedPath integrate_parametrized(const SpacetimeSolution& sol, double t0, double x0, double r_end, double ds);

/// Resamples the parametrized path at the trajectory's r samples (cubic
/// Hermite in z0) and returns the largest difference to w(r).
double reparametrization_mismatch(const Trajectory& traj, const ParametrizedPath& path);

}  // namespace regfield
