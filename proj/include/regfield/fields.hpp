#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "regfield/mollifier.hpp"
#include "regfield/scaling.hpp"

namespace regfield {

/// Uniform grid on [x_min, x_max] with n points (both ends included).
struct Grid {
    double x_min = -1.0;
    double x_max = 1.0;
    std::size_t n = 16;

    double dx() const { return (x_max - x_min) / static_cast<double>(n - 1); }
    double x(std::size_t i) const { return x_min + static_cast<double>(i) * dx(); }
    /// Throws std::invalid_argument unless x_min < x_max and n >= 16.
    void validate() const;
    /// Smallest grid with spacing <= dx_max covering [x_min, x_max].
    static Grid with_spacing(double x_min, double x_max, double dx_max);
};

/// The triple (E, u, sigma) at one time. sigma is the transformed density
/// rho * sqrt(1 + u^2).
struct FieldState {
    double t = 0.0;
    std::vector<double> E;
    std::vector<double> u;
    std::vector<double> sigma;

    static FieldState zeros(const Grid& g, double t = 0.0);
    std::size_t size() const { return E.size(); }
    bool all_finite() const;
    /// max over the three components of max |v|.
    double sup_norm() const;
};

struct ModelParams {
    double B0 = 0.0;
    double T = 1.0;
    double eps = 0.1;
    double q = 1.0;
    /// When false the source E + B0 a(u) is dropped from the u equation.
    /// Test mode only: with u0 = 0 it pins u to zero.
    bool velocity_coupling = true;
};

enum class RunStatus { Clean, GuardAbort, Overflow, BoundaryContaminated };

std::string_view to_string(RunStatus status);

struct PicardStats {
    double t_start = 0.0;
    double t_end = 0.0;
    int iterations = 0;
    double final_update = 0.0;
};

struct RunMeta {
    double eps = 0.0;
    double nu = 0.0;  // realized width h(eps)
    MollifierKind mollifier_kind = MollifierKind::SymmetricBump;
    Support mollifier_support{};
    ScalingFunction scaling{};
    ModelParams params{};
    std::string solver;  // "rk4" or "picard"
    double dt = 0.0;
    int save_every = 1;
    double a_priori_bound = 0.0;
    double guard_factor = 10.0;
    RunStatus status = RunStatus::Clean;
    std::string message;
    std::vector<PicardStats> picard;
};

/// Saved time slices of one run at fixed eps.
struct SpacetimeSolution {
    Grid grid{};
    std::vector<double> times;
    std::vector<FieldState> states;
    RunMeta meta{};

    void push(FieldState state);
    /// Checks monotone times and aligned states; throws std::logic_error.
    void check_consistency() const;
};

/// max |(1 + u^2) - sqrt(1 + u^2)^2| over the grid, using the solver's
/// square-root routine.
double restrict_velocity_norm(const FieldState& state);

/// Trapezoidal integral of sigma.
double total_charge(const FieldState& state, const Grid& grid);

/// Trapezoidal integral of samples f over the grid.
double trapezoid(std::span<const double> f, double dx);

/// True when |E|+|u|+|sigma| on the outermost 5% of points on either side
/// exceeds 1e-8 times the interior maximum.
bool boundary_contaminated(const FieldState& state);

}  // namespace regfield
