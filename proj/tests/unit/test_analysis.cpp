#include <cmath>
#include <stdexcept>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "regfield/analysis.hpp"
#include "regfield/deltanet.hpp"
#include "regfield/solver.hpp"

using namespace regfield;

namespace {

const Mollifier& sym() {
    static const Mollifier m = Mollifier::make(MollifierKind::SymmetricBump, {-1.0, 1.0});
    return m;
}

// A solution record whose sigma is a narrow bump riding along x = t.
SpacetimeSolution moving_bump(double q, double width) {
    SpacetimeSolution sol;
    sol.grid = Grid{-1.0, 2.0, 3001};
    sol.meta.nu = 0.1;
    sol.meta.mollifier_kind = MollifierKind::SymmetricBump;
    sol.meta.mollifier_support = {-1.0, 1.0};
    const double c = q / (width * oracle::simpson(oracle::bump, -1, 1));
    for (int k = 0; k <= 600; ++k) {
        FieldState s = FieldState::zeros(sol.grid, k * 1e-3);
        for (std::size_t i = 0; i < sol.grid.n; ++i) s.sigma[i] = c * oracle::bump((sol.grid.x(i) - s.t) / width);
        sol.push(std::move(s));
    }
    return sol;
}

SpacetimeSolution run(MollifierKind kind, Support support, const DeltaNet& net, double eps, Grid g, double T = 0.5,
                      double b0 = 1.0) {
    const Mollifier m = Mollifier::make(kind, support);
    const RegDerivOperator op = make_operator(m, 0.1, g);
    FieldState s0 = FieldState::zeros(g);
    s0.sigma = sample(net, eps, g);
    ModelParams p;
    p.B0 = b0;
    p.T = T;
    p.eps = eps;
    return solve_lines(s0, SolverConfig{}, op, p);
}

}  // namespace

TEST_CASE("test function shape") {
    const TestFunction2D psi{0.3, 0.3, 0.1, 0.2, 2.0};
    CHECK(psi(0.3, 0.3) == doctest::Approx(2.0));
    CHECK(psi(0.4, 0.3) == 0.0);
    CHECK(psi(0.3, 0.55) == 0.0);
    const double h = 1e-6;
    CHECK(psi.d_dt(0.33, 0.25) == doctest::Approx((psi(0.33 + h, 0.25) - psi(0.33 - h, 0.25)) / (2 * h)).epsilon(1e-6));
    CHECK(psi.d_dx(0.33, 0.25) == doctest::Approx((psi(0.33, 0.25 + h) - psi(0.33, 0.25 - h)) / (2 * h)).epsilon(1e-6));
}

TEST_CASE("pairing basics") {
    const SpacetimeSolution sol = moving_bump(1.0, 0.01);
    SpacetimeSolution zero = sol;
    for (auto& s : zero.states) std::fill(s.sigma.begin(), s.sigma.end(), 0.0);
    const TestFunction2D psi{0.3, 0.3, 0.1, 0.1, 1.0};
    CHECK(pair(zero, Field::sigma, psi) == 0.0);
    CHECK(pair(sol, Field::E, psi) == 0.0);

    // the bump moves along x = t, so the pairing captures integral psi(t, t) dt
    const double expected = oracle::simpson([&](double t) { return psi(t, t); }, 0.2, 0.4);
    CHECK(diagonal_delta_pairing(psi) == doctest::Approx(expected).epsilon(1e-8));
    CHECK(pair(sol, Field::sigma, psi) == doctest::Approx(expected).epsilon(1e-3));

    TestFunction2D twice = psi;
    twice.amplitude = 2.0;
    CHECK(pair(sol, Field::sigma, twice) == doctest::Approx(2.0 * pair(sol, Field::sigma, psi)).epsilon(1e-14));

    SpacetimeSolution scaled = sol;
    for (auto& s : scaled.states) {
        for (double& v : s.sigma) v *= -3.0;
    }
    CHECK(pair(scaled, Field::sigma, psi) == doctest::Approx(-3.0 * pair(sol, Field::sigma, psi)).epsilon(1e-14));

    CHECK_THROWS_AS(pair(sol, Field::sigma, TestFunction2D{0.55, 0.3, 0.1, 0.1, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(pair(sol, Field::sigma, TestFunction2D{0.3, 1.95, 0.1, 0.1, 1.0}), std::invalid_argument);
}

TEST_CASE("left kernel confines the solution to x <= 0") {
    DeltaNet net;
    net.anchor = NetAnchor::Left;
    const SpacetimeSolution sol = run(MollifierKind::LeftBump, {-1.0, 0.0}, net, 0.1, Grid{-6.0, 3.0, 1801});
    CHECK(sol.meta.status == RunStatus::Clean);
    const SupportProbe p = support_probe(sol, 0.05, ProbeSide::Right);
    CHECK(p.worst_relative() <= 1e-8);
    CHECK(p.max_sigma > 0.0);
    CHECK(p.max_E > 0.0);
    CHECK(p.max_u > 0.0);
}

TEST_CASE("centered nets under the left kernel stay left of their right edge") {
    DeltaNet net;
    const SpacetimeSolution sol = run(MollifierKind::LeftBump, {-1.0, 0.0}, net, 0.1, Grid{-6.0, 3.0, 1801});
    CHECK(support_probe(sol, 0.1 + 1e-9, ProbeSide::Right).worst_relative() == 0.0);
    CHECK(support_probe(sol, 0.05, ProbeSide::Right).relative_sigma() > 1e-3);
}

TEST_CASE("symmetric kernel spreads both ways") {
    DeltaNet net;
    const SpacetimeSolution sol = run(MollifierKind::SymmetricBump, {-1.0, 1.0}, net, 0.1, Grid{-4.0, 4.0, 1601});
    CHECK(support_probe(sol, 0.3, ProbeSide::Right).worst_relative() > 1e-6);
    CHECK(support_probe(sol, -0.3, ProbeSide::Left).worst_relative() > 1e-6);
}

TEST_CASE("transport residual") {
    const Grid g{-6.0, 6.0, 1201};
    const RegDerivOperator op = make_operator(sym(), 0.1, g);
    ModelParams p;
    p.B0 = 1.0;
    p.T = 0.5;
    SolverConfig c;
    c.dt = p.T / 40;
    const SpacetimeSolution zero = solve_lines(FieldState::zeros(g), c, op, p);
    CHECK(transport_residual(zero) == 0.0);

    FieldState s0 = FieldState::zeros(g);
    for (std::size_t i = 0; i < g.n; ++i) s0.E[i] = s0.sigma[i] = 0.2 * std::exp(-g.x(i) * g.x(i));
    const double r1 = transport_residual(solve_lines(s0, c, op, p));
    c.dt /= 2;
    const double r2 = transport_residual(solve_lines(s0, c, op, p));
    CHECK(r1 < 1e-3);
    CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.05));

    // fields that do not obey the E equation
    SpacetimeSolution fake = solve_lines(s0, c, op, p);
    for (auto& s : fake.states) {
        for (std::size_t i = 0; i < g.n; ++i) s.sigma[i] = std::exp(-g.x(i) * g.x(i)) * (1.0 + s.t);
    }
    CHECK(transport_residual(fake) > 0.1);

    c.dt = p.T / 10;  // save step 0.05 > nu / 4
    CHECK_THROWS_AS(transport_residual(solve_lines(s0, c, op, p)), std::invalid_argument);
}

TEST_CASE("classification") {
    const std::vector<double> zeros{0.0, 0.0, 0.0, 0.0};
    CHECK(classify(zeros, std::nullopt, {}).kind == VerdictKind::Converging);
    const std::vector<double> settling{1.0, 1.5, 1.7, 1.75};
    CHECK(classify(settling, std::nullopt, {}).kind == VerdictKind::Converging);
    const std::vector<double> growing{1.0, 1.1, 1.4, 2.4};
    CHECK(classify(growing, std::nullopt, {}).kind == VerdictKind::Diverging);
    const std::vector<double> wobbly{1.0, 1.5, 1.6, 2.4};
    CHECK(classify(wobbly, std::nullopt, {}).kind == VerdictKind::Inconclusive);
    const std::vector<double> confined{0.0, 0.0, 0.0};
    const std::vector<double> clean{0.0, 0.0, 0.0};
    const Verdict v = classify(confined, 0.08, clean);
    CHECK(v.kind == VerdictKind::Diverging);
    CHECK(v.str() == "diverging (support obstruction)");
    const std::vector<double> leaky{0.0, 1e-3, 0.0};
    CHECK(classify(confined, 0.08, leaky).str() == "diverging (bounded away from target)");
    const std::vector<double> near{0.07, 0.078, 0.0799};
    CHECK(classify(near, 0.08, clean).kind == VerdictKind::Converging);
    const std::vector<double> one{1.0};
    CHECK(classify(one, std::nullopt, {}).kind == VerdictKind::Inconclusive);
}

TEST_CASE("sweeps over zero data and eps-independent data converge") {
    const Grid g{-5.0, 5.0, 1001};
    const std::vector<double> eps{0.4, 0.2, 0.1, 0.05};
    const std::vector<Observable> obs{{"E", Field::E, {0.3, 0.0, 0.2, 0.5, 1.0}, std::nullopt},
                                      {"Q", Field::Q, {0.3, 0.2, 0.2, 0.5, 1.0}, std::nullopt}};
    const auto zero_run = [&](double e) {
        ModelParams p;
        p.T = 0.5;
        p.eps = e;
        return solve_lines(FieldState::zeros(g), SolverConfig{}, make_operator(sym(), 0.1, g), p);
    };
    const SweepResult z = limit_sweep(zero_run, eps, obs, 2);
    for (const auto& v : z.verdicts) CHECK(v.kind == VerdictKind::Converging);
    for (const auto& m : z.members) {
        CHECK(m.ok);
        for (double x : m.pairings) CHECK(x == 0.0);
    }

    const auto smooth_run = [&](double e) {
        ModelParams p;
        p.T = 0.5;
        p.eps = e;
        p.B0 = 1.0;
        FieldState s0 = FieldState::zeros(g);
        for (std::size_t i = 0; i < g.n; ++i) s0.E[i] = s0.sigma[i] = 0.1 * std::exp(-g.x(i) * g.x(i));
        return solve_lines(s0, SolverConfig{}, make_operator(sym(), 0.1, g), p);
    };
    const SweepResult s = limit_sweep(smooth_run, eps, obs, 3);
    for (std::size_t o = 0; o < obs.size(); ++o) {
        CHECK(s.verdicts[o].kind == VerdictKind::Converging);
        for (double inc : s.increments[o]) CHECK(inc < 1e-12);
    }
    const std::vector<double> bad{0.1, 0.2};
    CHECK_THROWS_AS(limit_sweep(zero_run, bad, obs, 1), std::invalid_argument);
}

TEST_CASE("sweeps report failed members as partial") {
    const Grid g{-5.0, 5.0, 1001};
    const std::vector<double> eps{0.4, 0.2, 0.1};
    const std::vector<Observable> obs{{"E", Field::E, {0.3, 0.0, 0.2, 0.5, 1.0}, std::nullopt}};
    const auto flaky = [&](double e) -> SpacetimeSolution {
        if (e < 0.15) throw std::runtime_error("boom");
        ModelParams p;
        p.T = 0.5;
        return solve_lines(FieldState::zeros(g), SolverConfig{}, make_operator(sym(), 0.1, g), p);
    };
    const SweepResult r = limit_sweep(flaky, eps, obs, 2);
    CHECK(r.partial);
    CHECK_FALSE(r.members[2].ok);
    CHECK(r.members[2].message.find("boom") != std::string::npos);
}

TEST_CASE("linearized reference closed form") {
    const LinearizedValues v = linearized_reference(1.0, 0.5, 0.25);
    CHECK(v.E == 1.0);
    CHECK(v.u == 0.25);
    const LinearizedValues w = linearized_reference(2.0, 0.5, 0.25);
    CHECK(w.E == 2.0);
    CHECK(w.u == 0.5);
    for (double x : {-0.3, -1e-9, 0.50001, 2.0}) {
        CHECK(linearized_reference(1.0, 0.5, x).E == 0.0);
        CHECK(linearized_reference(1.0, 0.5, x).u == 0.0);
    }
    for (double x : {-1.0, 0.0, 1.0}) {
        CHECK(linearized_reference(1.0, 0.0, x).E == 0.0);
        CHECK(linearized_reference(1.0, 0.0, x).u == 0.0);
    }
    CHECK(linearized_reference(1.0, 0.5, 0.0).E == 0.5);  // H(0) = 1/2
    const TestFunction2D psi{0.3, 0.0, 0.2, 0.2, 1.0};
    CHECK(linearized_sigma_pairing(3.0, psi) ==
          doctest::Approx(3.0 * oracle::simpson([&](double t) { return psi(t, 0.0); }, 0.1, 0.5)).epsilon(1e-9));
}

TEST_CASE("linearized reference satisfies the linear system weakly") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> t0(0.4, 1.5), x0(-0.8, 1.5), r(0.1, 0.35);
    for (int k = 0; k < 10; ++k) {
        TestFunction2D psi{t0(rng), x0(rng), r(rng), r(rng), 1.0};
        psi.rt = std::min(psi.rt, psi.t0 - 0.05);
        const WeakFormCheck c = check_linearized_weak_form(1.3, psi);
        CHECK(c.max_mismatch() <= 1e-6);
    }
}

TEST_CASE("comparison with the linearized reference") {
    DeltaNet net;
    net.mass = 0.0;
    const SpacetimeSolution zero = run(MollifierKind::SymmetricBump, {-1.0, 1.0}, net, 0.1, Grid{-3.0, 3.0, 1201},
                                       0.5, 0.0);
    CHECK(compare_linearized(zero, 0.0).max_err_E == 0.0);
    CHECK(compare_linearized(zero, 0.0).max_err_u == 0.0);

    const auto relative_error = [&](double q) {
        DeltaNet n;
        n.mass = q;
        const SpacetimeSolution sol =
            run(MollifierKind::SymmetricBump, {-1.0, 1.0}, n, 0.05, Grid{-3.0, 3.0, 1201}, 0.5, 0.0);
        const LinearizedComparison c = compare_linearized(sol, q);
        return std::pair{c.max_err_E / q, c.max_err_u / q};
    };
    // small charges: the error is the regularization defect and scales with q
    const auto tiny = relative_error(1e-4), small = relative_error(1e-3), large = relative_error(10.0);
    CHECK(small.first == doctest::Approx(tiny.first).epsilon(0.01));
    CHECK(small.second == doctest::Approx(tiny.second).epsilon(0.01));
    // q = 10 leaves the linear regime
    CHECK(large.first > 1.5 * small.first);
    CHECK(large.second > 1.5 * small.second);
}

TEST_CASE("blow-up probe") {
    DeltaNet net;
    net.mass = 0.0;
    const SpacetimeSolution zero = run(MollifierKind::SymmetricBump, {-1.0, 1.0}, net, 0.1, Grid{-3.0, 3.0, 1201});
    CHECK(blow_up_peak(zero) == 0.0);

    // u pinned to zero when the velocity source is switched off
    DeltaNet charged;
    const Mollifier m = sym();
    const Grid g{-3.0, 3.0, 1201};
    FieldState s0 = FieldState::zeros(g);
    s0.sigma = sample(charged, 0.1, g);
    ModelParams p;
    p.T = 0.5;
    p.velocity_coupling = false;
    const SpacetimeSolution pinned = solve_lines(s0, SolverConfig{}, make_operator(m, 0.1, g), p);
    CHECK(blow_up_peak(pinned) == 0.0);

    const std::vector<double> eps{0.2, 0.1, 0.05};
    std::vector<double> peaks;
    for (double e : eps) peaks.push_back(3.0 * std::pow(e, -0.5));
    CHECK(blow_up_probe(eps, peaks).exponent == doctest::Approx(0.5).epsilon(1e-12));
    const std::vector<double> none{0.0, 0.0, 0.0};
    CHECK(blow_up_probe(eps, none).exponent == 0.0);
}
