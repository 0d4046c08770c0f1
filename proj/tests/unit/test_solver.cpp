#include <cmath>
#include <stdexcept>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "regfield/analysis.hpp"
#include "regfield/solver.hpp"

using namespace regfield;

namespace {

const Mollifier& sym() {
    static const Mollifier m = Mollifier::make(MollifierKind::SymmetricBump, {-1.0, 1.0});
    return m;
}

FieldState gaussian_data(const Grid& g, double amp_e, double amp_u, double amp_s) {
    FieldState s = FieldState::zeros(g);
    for (std::size_t i = 0; i < g.n; ++i) {
        const double x = g.x(i);
        s.E[i] = amp_e * std::exp(-x * x);
        s.u[i] = amp_u * std::exp(-(x - 0.3) * (x - 0.3));
        s.sigma[i] = amp_s * std::exp(-x * x);
    }
    return s;
}

double max_diff(const FieldState& a, const FieldState& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d = std::max({d, std::abs(a.E[i] - b.E[i]), std::abs(a.u[i] - b.u[i]), std::abs(a.sigma[i] - b.sigma[i])});
    }
    return d;
}

// Straight-line convolution with the operator's weights.
std::vector<double> conv(const RegDerivOperator& op, const std::vector<double>& f) {
    const Stencil& st = op.stencil();
    const long n = static_cast<long>(f.size());
    std::vector<double> out(f.size(), 0.0);
    for (long i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < st.weights.size(); ++k) {
            const long src = i - (st.offset_lo + static_cast<long>(k));
            if (src >= 0 && src < n) out[static_cast<std::size_t>(i)] += st.weights[k] * f[static_cast<std::size_t>(src)];
        }
    }
    return out;
}

}  // namespace

TEST_CASE("rhs vanishes on zero data for any B0") {
    const Grid g{-2.0, 2.0, 201};
    const RegDerivOperator op = make_operator(sym(), 0.1, g);
    for (double b0 : {0.0, 1.0, -7.5}) {
        ModelParams p;
        p.B0 = b0;
        const FieldState r = rhs(FieldState::zeros(g), op, p);
        CHECK(r.sup_norm() == 0.0);
    }
}

TEST_CASE("rhs with u = 0 reduces to -D E + sigma") {
    const Grid g{-3.0, 3.0, 301};
    const RegDerivOperator op = make_operator(sym(), 0.1, g);
    ModelParams p;
    p.B0 = 2.0;
    FieldState s = gaussian_data(g, 0.5, 0.0, 0.7);
    const FieldState r = rhs(s, op, p);
    const auto de = op.apply(s.E);
    for (std::size_t i = 0; i < g.n; ++i) {
        CHECK(r.E[i] == doctest::Approx(-de[i] + s.sigma[i]).epsilon(1e-14).scale(1.0));
        CHECK(r.sigma[i] == 0.0);
        CHECK(r.u[i] == doctest::Approx(s.E[i]).epsilon(1e-14).scale(1.0));
    }
}

TEST_CASE("rhs matches an independent evaluation on a manufactured state") {
    const Grid g{-3.0, 3.0, 301};
    const RegDerivOperator op = make_operator(sym(), 0.08, g);
    ModelParams p;
    p.B0 = -1.3;
    FieldState s = FieldState::zeros(g);
    for (std::size_t i = 0; i < g.n; ++i) {
        const double x = g.x(i);
        const double env = std::exp(-x * x);
        s.E[i] = std::sin(2 * x) * env;
        s.u[i] = 3.0 * std::cos(x) * env;
        s.sigma[i] = (1.0 + 0.5 * std::sin(5 * x)) * env;
    }
    std::vector<double> energy(g.n), flux(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
        energy[i] = std::sqrt(1.0 + s.u[i] * s.u[i]) - 1.0;
        flux[i] = s.sigma[i] * s.u[i] / std::sqrt(1.0 + s.u[i] * s.u[i]);
    }
    const auto dE = conv(op, s.E), dEn = conv(op, energy), dF = conv(op, flux);
    const FieldState r = rhs(s, op, p);
    for (std::size_t i = 0; i < g.n; ++i) {
        const double a = s.u[i] / std::sqrt(1.0 + s.u[i] * s.u[i]);
        CHECK(r.E[i] == doctest::Approx(-dE[i] + s.sigma[i] * (1.0 - a)).epsilon(1e-12).scale(1.0));
        CHECK(r.u[i] == doctest::Approx(-dEn[i] + s.E[i] + p.B0 * a).epsilon(1e-12).scale(1.0));
        CHECK(r.sigma[i] == doctest::Approx(-dF[i]).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("rhs rejects non-finite states") {
    const Grid g{-1.0, 1.0, 101};
    const RegDerivOperator op = make_operator(sym(), 0.1, g);
    FieldState s = FieldState::zeros(g);
    s.u[4] = std::nan("");
    CHECK_THROWS_AS(rhs(s, op, ModelParams{}), SolverOverflow);
}

TEST_CASE("zero data stays zero") {
    const Grid g{-5.0, 5.0, 501};
    const RegDerivOperator op = make_operator(sym(), 0.1, g);
    ModelParams p;
    p.B0 = 5.0;
    p.T = 1.0;
    const SpacetimeSolution lines = solve_lines(FieldState::zeros(g), SolverConfig{}, op, p);
    CHECK(lines.meta.status == RunStatus::Clean);
    CHECK(lines.times.back() == doctest::Approx(1.0).epsilon(1e-14));
    for (const auto& s : lines.states) CHECK(s.sup_norm() == 0.0);

    SolverConfig pc;
    pc.method = SolverMethod::Picard;
    const SpacetimeSolution picard = solve_picard(FieldState::zeros(g), pc, op, p);
    for (const auto& st : picard.meta.picard) CHECK(st.iterations == 1);
    for (const auto& s : picard.states) CHECK(s.sup_norm() == 0.0);
}

TEST_CASE("step bound is enforced and the realized step divides T") {
    const Grid g{-5.0, 5.0, 501};
    const RegDerivOperator op = make_operator(sym(), 0.1, g);
    CHECK(step_bound(op) == doctest::Approx(0.5 * 0.1 / sym().l1_norm_deriv()).epsilon(1e-3));
    ModelParams p;
    p.T = 0.5;
    SolverConfig c;
    c.dt = 1.5 * step_bound(op);
    CHECK_THROWS_AS(solve_lines(FieldState::zeros(g), c, op, p), std::invalid_argument);
    c.dt = 0.0;
    const SpacetimeSolution sol = solve_lines(FieldState::zeros(g), c, op, p);
    CHECK(sol.meta.dt <= step_bound(op));
    CHECK(p.T / sol.meta.dt == doctest::Approx(std::round(p.T / sol.meta.dt)).epsilon(1e-12));
}

TEST_CASE("RK4 converges at fourth order in time") {
    const Grid g{-8.0, 8.0, 801};
    const RegDerivOperator op = make_operator(sym(), 0.1, g);
    ModelParams p;
    p.B0 = 1.0;
    p.T = 0.5;
    const FieldState s0 = gaussian_data(g, 0.3, 0.2, 0.3);
    const auto final_state = [&](int steps) {
        SolverConfig c;
        c.dt = p.T / steps;
        return solve_lines(s0, c, op, p).states.back();
    };
    const FieldState a = final_state(20), b = final_state(40), c = final_state(80);
    const double ratio = max_diff(a, b) / max_diff(b, c);
    CHECK(ratio == doctest::Approx(16.0).epsilon(0.1));
}

TEST_CASE("save_every thins the output and keeps the final time") {
    const Grid g{-5.0, 5.0, 501};
    const RegDerivOperator op = make_operator(sym(), 0.1, g);
    ModelParams p;
    p.T = 0.5;
    SolverConfig c;
    c.dt = 0.5 / 17;
    c.save_every = 4;
    const SpacetimeSolution sol = solve_lines(gaussian_data(g, 0.1, 0, 0.1), c, op, p);
    CHECK(sol.states.size() == 6);  // 0,4,8,12,16,17
    CHECK(sol.times.back() == doctest::Approx(0.5));
    CHECK_NOTHROW(sol.check_consistency());
}

TEST_CASE("Picard agrees with RK4 on smooth data") {
    const Grid g{-8.0, 8.0, 1601};
    const RegDerivOperator op = make_operator(sym(), 0.1, g);
    ModelParams p;
    p.B0 = 1.0;
    p.T = 0.3;
    const FieldState s0 = gaussian_data(g, 0.1, 0.05, 0.1);
    SolverConfig lc;
    const SpacetimeSolution a = solve_lines(s0, lc, op, p);
    SolverConfig pc;
    pc.method = SolverMethod::Picard;
    pc.dt = a.meta.dt / 8;
    const SpacetimeSolution b = solve_picard(s0, pc, op, p);
    CHECK(b.meta.picard.size() > 1);
    std::size_t matched = 0;
    double worst = 0.0;
    for (std::size_t k = 0; k < a.states.size(); ++k) {
        for (std::size_t j = 0; j < b.states.size(); ++j) {
            if (std::abs(a.times[k] - b.times[j]) < 1e-9) {
                ++matched;
                worst = std::max(worst, max_diff(a.states[k], b.states[j]));
            }
        }
    }
    CHECK(matched == a.states.size());
    CHECK(worst <= 1e-5);
}

TEST_CASE("Picard iteration count grows with the subinterval length") {
    const Grid g{-6.0, 6.0, 601};
    const RegDerivOperator op = make_operator(sym(), 0.1, g);
    ModelParams p;
    p.B0 = 1.0;
    p.T = 0.4;
    const FieldState s0 = gaussian_data(g, 0.1, 0.0, 0.1);
    const double tc = contraction_horizon(op, p);
    CHECK(tc == doctest::Approx(0.25 / (op.norm_bound() + 2.0 + 1.0)));
    int previous = 0;
    for (double f : {0.25, 1.0, 4.0, 8.0}) {
        SolverConfig c;
        c.method = SolverMethod::Picard;
        c.dt = p.T / 400;
        c.picard_horizon = f * tc;
        const SpacetimeSolution sol = solve_picard(s0, c, op, p);
        CHECK(sol.meta.picard.front().iterations >= previous);
        previous = sol.meta.picard.front().iterations;
    }
    CHECK(previous > 4);
}

TEST_CASE("Picard reports failure to converge") {
    const Grid g{-6.0, 6.0, 601};
    const RegDerivOperator op = make_operator(sym(), 0.1, g);
    ModelParams p;
    p.T = 0.4;
    SolverConfig c;
    c.method = SolverMethod::Picard;
    c.picard_max_iter = 2;
    CHECK_THROWS_AS(solve_picard(gaussian_data(g, 0.1, 0.0, 0.1), c, op, p), PicardError);
}

TEST_CASE("charge is conserved") {
    const Grid g{-8.0, 8.0, 801};
    const RegDerivOperator op = make_operator(sym(), 0.1, g);
    ModelParams p;
    p.B0 = 1.0;
    p.T = 0.5;
    const SpacetimeSolution sol = solve_lines(gaussian_data(g, 0.2, 0.3, 0.4), SolverConfig{}, op, p);
    const double q0 = total_charge(sol.states.front(), g);
    for (const auto& s : sol.states) CHECK(std::abs(total_charge(s, g) - q0) <= 1e-6 * q0);
}

TEST_CASE("transport quantity evolves by the scalar transport law") {
    const Grid g{-8.0, 8.0, 801};
    const RegDerivOperator op = make_operator(sym(), 0.1, g);
    ModelParams p;
    p.B0 = 0.7;
    p.T = 0.5;
    SolverConfig c;
    c.dt = p.T / 40;
    const SpacetimeSolution sol = solve_lines(gaussian_data(g, 0.2, 0.3, 0.4), c, op, p);
    const auto q0 = transport_quantity(sol.states.front(), op);
    const auto qt = transport_rk4(q0, op, c.dt, 40);
    const auto q_solver = transport_quantity(sol.states.back(), op);
    double d = 0.0;
    for (std::size_t i = 0; i < g.n; ++i) d = std::max(d, std::abs(qt[i] - q_solver[i]));
    CHECK(d <= 1e-5);
}

TEST_CASE("a priori bound shape and guard") {
    const Grid g{-5.0, 5.0, 501};
    const RegDerivOperator op = make_operator(sym(), 0.1, g);
    ModelParams p;
    p.T = 0.5;
    const FieldState zero = FieldState::zeros(g);
    const double n = std::max(op.norm_bound(), op.discrete_norm());
    CHECK(a_priori_bound(zero, op, p) == doctest::Approx(p.T * n * std::exp(p.T * (3 * n + 2))));
    const FieldState data = gaussian_data(g, 0.1, 0.0, 0.1);
    ModelParams longer = p;
    longer.T = 0.6;
    ModelParams stronger = p;
    stronger.B0 = 3.0;
    const FieldState bigger = gaussian_data(g, 0.5, 0.0, 0.1);
    CHECK(a_priori_bound(data, op, longer) > a_priori_bound(data, op, p));
    CHECK(a_priori_bound(data, op, stronger) > a_priori_bound(data, op, p));
    CHECK(a_priori_bound(bigger, op, p) > a_priori_bound(data, op, p));
    CHECK(a_priori_bound(zero, op, p) < a_priori_bound(data, op, p));

    const SpacetimeSolution sol = solve_lines(data, SolverConfig{}, op, p);
    for (const auto& s : sol.states) CHECK(s.sup_norm() <= sol.meta.a_priori_bound);
}

TEST_CASE("overflow stops the run and keeps partial output") {
    // the one-sided kernel is not skew, so oscillations grow like exp(t ||D||)
    const Grid g{-5.0, 5.0, 501};
    const RegDerivOperator op = make_operator(Mollifier::make(MollifierKind::LeftBump, {-1.0, 0.0}), 0.1, g);
    ModelParams p;
    p.T = 3.0;
    FieldState s0 = FieldState::zeros(g);
    for (std::size_t i = 240; i < 260; ++i) s0.sigma[i] = (i % 2 ? 1.0 : -1.0) * 1e300;
    const SpacetimeSolution sol = solve_lines(s0, SolverConfig{}, op, p);
    CHECK(sol.meta.status == RunStatus::Overflow);
    CHECK(sol.meta.message.find("overflow") != std::string::npos);
    CHECK(sol.states.size() >= 1);
    CHECK(sol.times.back() < p.T);
    for (const auto& s : sol.states) CHECK(s.all_finite());
    SolverConfig weak;
    weak.guard_factor = 0.5;
    CHECK_THROWS_AS(solve_lines(s0, weak, op, p), std::invalid_argument);
}

TEST_CASE("nearby data stay within the Gronwall envelope") {
    const Grid g{-8.0, 8.0, 801};
    const RegDerivOperator op = make_operator(sym(), 0.1, g);
    ModelParams p;
    p.B0 = 1.0;
    p.T = 0.5;
    FieldState a = gaussian_data(g, 0.2, 0.1, 0.2);
    FieldState b = a;
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> dist(-1e-10, 1e-10);
    for (std::size_t i = 100; i + 100 < g.n; ++i) {
        b.E[i] += dist(rng);
        b.u[i] += dist(rng);
        b.sigma[i] += dist(rng);
    }
    const SpacetimeSolution sa = solve_lines(a, SolverConfig{}, op, p);
    const SpacetimeSolution sb = solve_lines(b, SolverConfig{}, op, p);
    const double rate = 3.0 * std::max(op.norm_bound(), op.discrete_norm()) + 2.0 + std::abs(p.B0);
    for (std::size_t k = 0; k < sa.states.size(); ++k) {
        CHECK(max_diff(sa.states[k], sb.states[k]) <= 1e-10 * std::exp(rate * sa.times[k]));
    }
}

TEST_CASE("backward runs cover [-T, 0]") {
    const Grid g{-6.0, 6.0, 601};
    const RegDerivOperator op = make_operator(sym(), 0.1, g);
    ModelParams p;
    p.T = 0.3;
    SolverConfig c;
    c.backward = true;
    const SpacetimeSolution back = solve_lines(gaussian_data(g, 0.1, 0.1, 0.1), c, op, p);
    CHECK(back.times.back() == doctest::Approx(-0.3));
    CHECK_NOTHROW(back.check_consistency());
    // integrating forward again returns to the data
    SolverConfig f;
    f.dt = back.meta.dt;
    FieldState end = back.states.back();
    end.t = 0.0;
    const SpacetimeSolution fwd = solve_lines(end, f, op, p);
    CHECK(max_diff(fwd.states.back(), back.states.front()) < 1e-8);
}
