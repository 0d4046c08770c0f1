#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "regfield/fields.hpp"
#include "regfield/regops.hpp"

namespace regfield {

enum class SolverMethod { LinesRK4, Picard };

std::string_view to_string(SolverMethod method);
SolverMethod solver_method_from_string(std::string_view name);

struct SolverConfig {
    SolverMethod method = SolverMethod::LinesRK4;
    /// Time step (LinesRK4) or node spacing (Picard); 0 selects it from the
    /// step bound. The realized step is T / ceil(T / dt).
    double dt = 0.0;
    double picard_tol = 1e-10;
    int picard_max_iter = 200;
    /// Picard subinterval length; 0 selects the contraction horizon.
    double picard_horizon = 0.0;
    int save_every = 1;
    double guard_factor = 10.0;
    /// Integrate over [-T, 0] instead of [0, T].
    bool backward = false;
};

/// Raised when a field value becomes non-finite.
class SolverOverflow : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when the Picard iteration fails to contract or to converge.
class PicardError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Largest admissible RK4 step, 0.5 nu / ||phi'||_1.
double step_bound(const RegDerivOperator& op);

/// Picard subinterval length 0.25 / (||phi'||_1/nu + 2 + |B0|).
double contraction_horizon(const RegDerivOperator& op, const ModelParams& params);

/// Time derivatives of the regularized system:
///   E' = -D E + sigma (1 - a(u))
///   u' = -D sqrt(1 + u^2) + E + B0 a(u)
///   sigma' = -D (sigma a(u))
/// D is applied to sqrt(1 + u^2) - 1, which equals D sqrt(1 + u^2) on the
/// whole line and keeps zero padding consistent at the grid ends.
/// The returned triple carries t = state.t. Throws SolverOverflow on
/// non-finite input.
FieldState rhs(const FieldState& state, const RegDerivOperator& op, const ModelParams& params);

/// (||V0|| + T (N + |B0|)) exp(T (3N + 2)) with N the operator norm of D.
double a_priori_bound(const FieldState& initial, const RegDerivOperator& op, const ModelParams& params);

/// Method of lines with classical RK4. Stops early (status GuardAbort or
/// Overflow, partial output kept) when the guard trips or values overflow.
/// Throws std::invalid_argument when dt violates the step bound.
SpacetimeSolution solve_lines(const FieldState& initial, const SolverConfig& cfg, const RegDerivOperator& op,
                              const ModelParams& params);

/// Fixed-point iteration of the integral form, chained over subintervals of
/// at most the contraction horizon. Time integrals use the trapezoidal rule
/// on the node grid. Throws PicardError on non-contraction or when
/// picard_max_iter is exceeded.
SpacetimeSolution solve_picard(const FieldState& initial, const SolverConfig& cfg, const RegDerivOperator& op,
                               const ModelParams& params);

/// Dispatches on cfg.method.
SpacetimeSolution solve(const FieldState& initial, const SolverConfig& cfg, const RegDerivOperator& op,
                        const ModelParams& params);

/// RK4 for the scalar regularized transport Q' = -D Q; returns Q after
/// n_steps of size dt.
std::vector<double> transport_rk4(std::span<const double> q0, const RegDerivOperator& op, double dt, int n_steps);

}  // namespace regfield
