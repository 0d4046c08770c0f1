#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "regfield/fields.hpp"
#include "regfield/regops.hpp"

namespace regfield {

enum class Field { E, u, sigma, Q };

std::string_view to_string(Field field);
Field field_from_string(std::string_view name);

/// Smooth radial bump in (t, x):
///   psi = amplitude * exp(1 - 1/(1 - rho^2)),  rho^2 = ((t-t0)/rt)^2 + ((x-x0)/rx)^2
/// supported in the closed ellipse rho <= 1, peak value amplitude.
struct TestFunction2D {
    double t0 = 0.0;
    double x0 = 0.0;
    double rt = 1.0;
    double rx = 1.0;
    double amplitude = 1.0;

    double operator()(double t, double x) const;
    double d_dt(double t, double x) const;
    double d_dx(double t, double x) const;
};

/// Rebuilds the regularized derivative used by a run from its metadata.
RegDerivOperator rebuild_operator(const SpacetimeSolution& sol);

/// Q = sigma - D E.
std::vector<double> transport_quantity(const FieldState& state, const RegDerivOperator& op);

/// Field values of one saved state; Q needs the operator.
std::vector<double> field_values(const FieldState& state, Field field, const RegDerivOperator& op);

/// 2D trapezoidal pairing of a field with psi over the saved states.
/// Throws std::invalid_argument when psi's support leaves the window.
double pair(const SpacetimeSolution& sol, Field field, const TestFunction2D& psi);

enum class ProbeSide { Right, Left };  // {x >= x0} or {x <= x0}

struct SupportProbe {
    double x0 = 0.0;
    ProbeSide side = ProbeSide::Right;
    double sup_E = 0.0, sup_u = 0.0, sup_sigma = 0.0;
    double max_E = 0.0, max_u = 0.0, max_sigma = 0.0;

    double relative_E() const { return max_E > 0.0 ? sup_E / max_E : 0.0; }
    double relative_u() const { return max_u > 0.0 ? sup_u / max_u : 0.0; }
    double relative_sigma() const { return max_sigma > 0.0 ? sup_sigma / max_sigma : 0.0; }
    double worst_relative() const;
};

/// Largest |E|, |u|, |sigma| on one side of x0 over all saved states, with
/// each field's global maximum for scale.
SupportProbe support_probe(const SpacetimeSolution& sol, double x0, ProbeSide side = ProbeSide::Right);
/// Same, restricted to a single saved state.
SupportProbe support_probe(const SpacetimeSolution& sol, std::size_t state_index, double x0, ProbeSide side);

/// max |dQ/dt + D Q| over interior saved times, dQ/dt by three-point
/// differences. The save step must not exceed nu / 4.
double transport_residual(const SpacetimeSolution& sol);

// ---------------------------------------------------------------------------
// eps sweeps

struct Observable {
    std::string name;
    Field field = Field::sigma;
    TestFunction2D psi{};
    /// Pairing of the expected limit, e.g. the integral of psi(t, t) for a
    /// delta on the line t = x.
    std::optional<double> target;
};

enum class VerdictKind { Converging, Diverging, Inconclusive };

struct Verdict {
    VerdictKind kind = VerdictKind::Inconclusive;
    std::string reason;

    std::string str() const;
};

struct SweepMember {
    double eps = 0.0;
    bool ok = false;
    std::string message;
    RunStatus status = RunStatus::Clean;
    std::vector<double> pairings;  // one per observable
    /// Support probe at the lower x edge of each observable's psi.
    std::vector<double> right_support_relative;
};

struct SweepResult {
    std::vector<double> eps_schedule;
    std::vector<Observable> observables;
    std::vector<SweepMember> members;
    /// increments[o][i] = |p(eps_{i+1}) - p(eps_i)|
    std::vector<std::vector<double>> increments;
    std::vector<Verdict> verdicts;
    bool partial = false;
};

using RunFactory = std::function<SpacetimeSolution(double eps)>;

/// Runs one solve per eps (up to `workers` concurrently), pairs each run
/// with the observables and classifies the eps dependence.
SweepResult limit_sweep(const RunFactory& run, std::span<const double> eps_schedule,
                        std::span<const Observable> observables, int workers = 1);

/// Classification of a pairing sequence (exposed for testing).
Verdict classify(std::span<const double> pairings, std::optional<double> target,
                 std::span<const double> right_support_relative);

/// Integral of psi(t, t) dt.
double diagonal_delta_pairing(const TestFunction2D& psi);

// ---------------------------------------------------------------------------
// linearized reference

struct LinearizedValues {
    double E;
    double u;
};

/// Closed-form solution of E_t + E_x = sigma, u_t = E, sigma_t = 0 with
/// data (0, 0, q delta), H(0) = 1/2.
LinearizedValues linearized_reference(double q, double t, double x);

/// Pairing of sigma = q delta(x) with psi: q * integral of psi(t, 0) dt.
double linearized_sigma_pairing(double q, const TestFunction2D& psi);

struct WeakFormCheck {
    // E equation:  -<E, psi_t + psi_x>  vs  <sigma, psi>
    double e_lhs, e_rhs;
    // u equation:  -<u, psi_t>  vs  <E, psi>
    double u_lhs, u_rhs;
    // sigma equation: -<sigma, psi_t> vs 0
    double s_lhs, s_rhs;

    double max_mismatch() const;
};

/// Pairs both sides of the linearized system with psi using composite
/// Gauss quadrature of the closed form. psi must be supported in t > 0.
WeakFormCheck check_linearized_weak_form(double q, const TestFunction2D& psi);

struct LinearizedComparison {
    std::vector<double> times;
    std::vector<double> err_E;  // L1 in x
    std::vector<double> err_u;
    double max_err_E = 0.0;
    double max_err_u = 0.0;
};

LinearizedComparison compare_linearized(const SpacetimeSolution& sol, double q);

// ---------------------------------------------------------------------------
// blow-up probe

/// max over saved states and |x - center| <= window of |sigma a(u)|.
double blow_up_peak(const SpacetimeSolution& sol, double center = 0.0, double window = 0.5);

struct BlowUpReport {
    std::vector<double> eps;
    std::vector<double> peaks;
    /// Least-squares slope of log(peak) against log(1/eps); 0 when any peak is 0.
    double exponent = 0.0;
};

BlowUpReport blow_up_probe(std::span<const double> eps, std::span<const double> peaks);

}  // namespace regfield
