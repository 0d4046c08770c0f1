#include "regfield/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "regfield/nonlinearity.hpp"

namespace regfield {

namespace {

std::string overflow_message(double t) {
    std::ostringstream os;
    os << "overflow at t = " << t;
    return os.str();
}

/// Scratch buffers for repeated right-hand-side evaluations on one grid.
class RhsWorkspace {
public:
    explicit RhsWorkspace(std::size_t n) : flux_(n), dflux_(n), a_u_(n) {}

    void eval(const FieldState& s, const RegDerivOperator& op, const ModelParams& p, FieldState& out) {
        if (!s.all_finite()) throw SolverOverflow(overflow_message(s.t));
        const std::size_t n = s.size();
        out.t = s.t;
        out.E.resize(n);
        out.u.resize(n);
        out.sigma.resize(n);

        for (std::size_t i = 0; i < n; ++i) a_u_[i] = nonlinearity::a(s.u[i]);

        op.apply(s.E, dflux_);
        for (std::size_t i = 0; i < n; ++i) out.E[i] = -dflux_[i] + s.sigma[i] * (1.0 - a_u_[i]);

        for (std::size_t i = 0; i < n; ++i) flux_[i] = nonlinearity::sqrt1p_sq_minus_one(s.u[i]);
        op.apply(flux_, dflux_);
        if (p.velocity_coupling) {
            for (std::size_t i = 0; i < n; ++i) out.u[i] = -dflux_[i] + s.E[i] + p.B0 * a_u_[i];
        } else {
            for (std::size_t i = 0; i < n; ++i) out.u[i] = -dflux_[i];
        }

        for (std::size_t i = 0; i < n; ++i) flux_[i] = s.sigma[i] * a_u_[i];
        op.apply(flux_, dflux_);
        for (std::size_t i = 0; i < n; ++i) out.sigma[i] = -dflux_[i];

        if (!out.all_finite()) throw SolverOverflow(overflow_message(s.t));
    }

private:
    std::vector<double> flux_;
    std::vector<double> dflux_;
    std::vector<double> a_u_;
};

/// out = base + h * rate, component-wise.
void axpy(const FieldState& base, double h, const FieldState& rate, FieldState& out) {
    const std::size_t n = base.size();
    out.E.resize(n);
    out.u.resize(n);
    out.sigma.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.E[i] = base.E[i] + h * rate.E[i];
        out.u[i] = base.u[i] + h * rate.u[i];
        out.sigma[i] = base.sigma[i] + h * rate.sigma[i];
    }
}

/// Realized step T / ceil(T / dt_requested).
std::pair<double, long> realize_step(double horizon, double dt_requested) {
    const auto steps = std::max(1L, static_cast<long>(std::ceil(horizon / dt_requested - 1e-9)));
    return {horizon / static_cast<double>(steps), steps};
}

void check_common(const FieldState& initial, const SolverConfig& cfg, const RegDerivOperator& op,
                  const ModelParams& params) {
    if (initial.size() != op.grid().n) throw std::invalid_argument("solver: initial data length differs from grid");
    if (!initial.all_finite()) throw std::invalid_argument("solver: initial data contains non-finite values");
    if (!(params.T > 0.0)) throw std::invalid_argument("solver: time horizon T must be positive");
    if (cfg.save_every < 1) throw std::invalid_argument("solver: save_every must be >= 1");
    if (!(cfg.guard_factor >= 1.0)) throw std::invalid_argument("solver: guard_factor must be >= 1");
    if (cfg.dt < 0.0) throw std::invalid_argument("solver: dt must be nonnegative (0 selects it automatically)");
}

RunMeta base_meta(const SolverConfig& cfg, const RegDerivOperator& op, const ModelParams& params, double dt,
                  double bound) {
    RunMeta meta;
    meta.eps = params.eps;
    meta.nu = op.nu();
    meta.mollifier_kind = op.mollifier().kind();
    meta.mollifier_support = op.mollifier().support();
    meta.params = params;
    meta.solver = std::string(to_string(cfg.method));
    meta.dt = dt;
    meta.save_every = cfg.save_every;
    meta.a_priori_bound = bound;
    meta.guard_factor = cfg.guard_factor;
    return meta;
}

void flag_contamination(SpacetimeSolution& sol, const FieldState& s) {
    if (sol.meta.status == RunStatus::Clean && boundary_contaminated(s)) {
        sol.meta.status = RunStatus::BoundaryContaminated;
        std::ostringstream os;
        os << "boundary contaminated at t = " << s.t;
        sol.meta.message = os.str();
    }
}

}  // namespace

std::string_view to_string(SolverMethod method) {
    switch (method) {
        case SolverMethod::LinesRK4: return "rk4";
        case SolverMethod::Picard: return "picard";
    }
    return "unknown";
}

SolverMethod solver_method_from_string(std::string_view name) {
    if (name == "rk4") return SolverMethod::LinesRK4;
    if (name == "picard") return SolverMethod::Picard;
    throw std::invalid_argument("solver: unknown method '" + std::string(name) + "' (expected rk4 or picard)");
}

double step_bound(const RegDerivOperator& op) { return 0.5 / op.norm_bound(); }

double contraction_horizon(const RegDerivOperator& op, const ModelParams& params) {
    return 0.25 / (op.norm_bound() + 2.0 + std::abs(params.B0));
}

FieldState rhs(const FieldState& state, const RegDerivOperator& op, const ModelParams& params) {
    if (state.size() != op.grid().n) throw std::invalid_argument("solver: state length differs from grid");
    RhsWorkspace ws(state.size());
    FieldState out;
    ws.eval(state, op, params, out);
    return out;
}

double a_priori_bound(const FieldState& initial, const RegDerivOperator& op, const ModelParams& params) {
    const double norm = std::max(op.norm_bound(), op.discrete_norm());
    const double T = std::abs(params.T);
    return (initial.sup_norm() + T * (norm + std::abs(params.B0))) * std::exp(T * (3.0 * norm + 2.0));
}

SpacetimeSolution solve_lines(const FieldState& initial, const SolverConfig& cfg, const RegDerivOperator& op,
                              const ModelParams& params) {
    if (cfg.method != SolverMethod::LinesRK4) throw std::invalid_argument("solver: solve_lines needs method rk4");
    check_common(initial, cfg, op, params);
    const double bound_dt = step_bound(op);
    const auto [dt, steps] = realize_step(params.T, cfg.dt > 0.0 ? cfg.dt : bound_dt);
    if (dt > bound_dt * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "solver: dt = " << dt << " exceeds the step bound 0.5 nu / ||phi'||_1 = " << bound_dt;
        throw std::invalid_argument(os.str());
    }
    const double sign = cfg.backward ? -1.0 : 1.0;
    const double h = sign * dt;

    const double bound = a_priori_bound(initial, op, params);
    SpacetimeSolution sol;
    sol.grid = op.grid();
    sol.meta = base_meta(cfg, op, params, dt, bound);

    FieldState current = initial;
    current.t = 0.0;
    flag_contamination(sol, current);
    sol.push(current);

    const std::size_t n = initial.size();
    RhsWorkspace ws(n);
    FieldState k1, k2, k3, k4, stage;
    const double guard = cfg.guard_factor * bound;

    for (long step = 1; step <= steps; ++step) {
        const double t0 = sign * static_cast<double>(step - 1) * dt;
        try {
            current.t = t0;
            ws.eval(current, op, params, k1);
            axpy(current, 0.5 * h, k1, stage);
            stage.t = t0 + 0.5 * h;
            ws.eval(stage, op, params, k2);
            axpy(current, 0.5 * h, k2, stage);
            ws.eval(stage, op, params, k3);
            axpy(current, h, k3, stage);
            stage.t = t0 + h;
            ws.eval(stage, op, params, k4);
        } catch (const SolverOverflow& e) {
            sol.meta.status = RunStatus::Overflow;
            sol.meta.message = e.what();
            return sol;
        }
        for (std::size_t i = 0; i < n; ++i) {
            current.E[i] += h / 6.0 * (k1.E[i] + 2.0 * k2.E[i] + 2.0 * k3.E[i] + k4.E[i]);
            current.u[i] += h / 6.0 * (k1.u[i] + 2.0 * k2.u[i] + 2.0 * k3.u[i] + k4.u[i]);
            current.sigma[i] += h / 6.0 * (k1.sigma[i] + 2.0 * k2.sigma[i] + 2.0 * k3.sigma[i] + k4.sigma[i]);
        }
        current.t = sign * static_cast<double>(step) * dt;

        if (!current.all_finite()) {
            sol.meta.status = RunStatus::Overflow;
            sol.meta.message = overflow_message(current.t);
            return sol;
        }
        const double sup = current.sup_norm();
        if (sup > guard) {
            sol.push(current);
            sol.meta.status = RunStatus::GuardAbort;
            std::ostringstream os;
            os << "guard abort at t = " << current.t << ": max|V| = " << sup << " exceeds " << cfg.guard_factor
               << " x a-priori bound " << bound;
            sol.meta.message = os.str();
            return sol;
        }
        if (step % cfg.save_every == 0 || step == steps) {
            flag_contamination(sol, current);
            sol.push(current);
        }
    }
    return sol;
}

SpacetimeSolution solve_picard(const FieldState& initial, const SolverConfig& cfg, const RegDerivOperator& op,
                               const ModelParams& params) {
    if (cfg.method != SolverMethod::Picard) throw std::invalid_argument("solver: solve_picard needs method picard");
    check_common(initial, cfg, op, params);
    if (!(cfg.picard_tol > 0.0)) throw std::invalid_argument("solver: picard_tol must be positive");
    if (cfg.picard_max_iter < 1) throw std::invalid_argument("solver: picard_max_iter must be >= 1");
    if (cfg.picard_horizon < 0.0) throw std::invalid_argument("solver: picard_horizon must be >= 0");

    const auto [delta, total_nodes] = realize_step(params.T, cfg.dt > 0.0 ? cfg.dt : 0.25 * step_bound(op));
    const double horizon = cfg.picard_horizon > 0.0 ? cfg.picard_horizon : contraction_horizon(op, params);
    const long nodes_per_interval = std::max(1L, static_cast<long>(std::floor(horizon / delta + 1e-9)));
    const double sign = cfg.backward ? -1.0 : 1.0;
    const double h = sign * delta;

    SpacetimeSolution sol;
    sol.grid = op.grid();
    sol.meta = base_meta(cfg, op, params, delta, a_priori_bound(initial, op, params));

    const std::size_t n = initial.size();
    RhsWorkspace ws(n);
    FieldState start = initial;
    start.t = 0.0;
    flag_contamination(sol, start);
    sol.push(start);

    std::vector<FieldState> iterate, next, rates;
    long node0 = 0;
    while (node0 < total_nodes) {
        const long m = std::min(nodes_per_interval, total_nodes - node0);
        const auto count = static_cast<std::size_t>(m + 1);
        iterate.assign(count, start);
        for (std::size_t j = 0; j < count; ++j) iterate[j].t = sign * static_cast<double>(node0 + static_cast<long>(j)) * delta;
        next = iterate;
        rates.resize(count);

        PicardStats stats;
        stats.t_start = iterate.front().t;
        stats.t_end = iterate.back().t;
        double previous_update = 0.0;
        int growth_streak = 0;
        bool converged = false;
        for (int it = 1; it <= cfg.picard_max_iter; ++it) {
            try {
                for (std::size_t j = 0; j < count; ++j) ws.eval(iterate[j], op, params, rates[j]);
            } catch (const SolverOverflow& e) {
                sol.meta.status = RunStatus::Overflow;
                sol.meta.message = e.what();
                return sol;
            }
            double update = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double accE = start.E[i];
                double accU = start.u[i];
                double accS = start.sigma[i];
                for (std::size_t j = 1; j < count; ++j) {
                    accE += 0.5 * h * (rates[j - 1].E[i] + rates[j].E[i]);
                    accU += 0.5 * h * (rates[j - 1].u[i] + rates[j].u[i]);
                    accS += 0.5 * h * (rates[j - 1].sigma[i] + rates[j].sigma[i]);
                    next[j].E[i] = accE;
                    next[j].u[i] = accU;
                    next[j].sigma[i] = accS;
                    update = std::max({update, std::abs(accE - iterate[j].E[i]), std::abs(accU - iterate[j].u[i]),
                                       std::abs(accS - iterate[j].sigma[i])});
                }
            }
            std::swap(iterate, next);
            stats.iterations = it;
            stats.final_update = update;
            if (!(update == update)) throw PicardError("picard: update became NaN at t = " + std::to_string(stats.t_start));
            if (update < cfg.picard_tol) {
                converged = true;
                break;
            }
            growth_streak = (it > 1 && update > previous_update) ? growth_streak + 1 : 0;
            if (growth_streak >= 5) {
                std::ostringstream os;
                os << "picard: update grew for 5 consecutive iterations on [" << stats.t_start << ", " << stats.t_end
                   << "]; use a shorter subinterval";
                throw PicardError(os.str());
            }
            previous_update = update;
        }
        if (!converged) {
            std::ostringstream os;
            os << "picard: no convergence within " << cfg.picard_max_iter << " iterations on [" << stats.t_start
               << ", " << stats.t_end << "], last update " << stats.final_update;
            throw PicardError(os.str());
        }
        sol.meta.picard.push_back(stats);

        for (std::size_t j = 1; j < count; ++j) {
            const long global = node0 + static_cast<long>(j);
            if (global % cfg.save_every == 0 || global == total_nodes) {
                flag_contamination(sol, iterate[j]);
                sol.push(iterate[j]);
            }
        }
        start = iterate.back();
        node0 += m;
    }
    return sol;
}

SpacetimeSolution solve(const FieldState& initial, const SolverConfig& cfg, const RegDerivOperator& op,
                        const ModelParams& params) {
    return cfg.method == SolverMethod::Picard ? solve_picard(initial, cfg, op, params)
                                              : solve_lines(initial, cfg, op, params);
}

std::vector<double> transport_rk4(std::span<const double> q0, const RegDerivOperator& op, double dt, int n_steps) {
    const std::size_t n = q0.size();
    std::vector<double> q(q0.begin(), q0.end()), k1(n), k2(n), k3(n), k4(n), stage(n);
    for (int s = 0; s < n_steps; ++s) {
        op.apply(q, k1);
        for (std::size_t i = 0; i < n; ++i) stage[i] = q[i] - 0.5 * dt * k1[i];
        op.apply(stage, k2);
        for (std::size_t i = 0; i < n; ++i) stage[i] = q[i] - 0.5 * dt * k2[i];
        op.apply(stage, k3);
        for (std::size_t i = 0; i < n; ++i) stage[i] = q[i] - dt * k3[i];
        op.apply(stage, k4);
        for (std::size_t i = 0; i < n; ++i) q[i] -= dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return q;
}

}  // namespace regfield
