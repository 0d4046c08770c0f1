#include "regfield/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <boost/math/quadrature/gauss.hpp>

#include "regfield/nonlinearity.hpp"
#include "regfield/quadrature.hpp"

namespace regfield {

std::string_view to_string(Field field) {
    switch (field) {
        case Field::E: return "E";
        case Field::u: return "u";
        case Field::sigma: return "sigma";
        case Field::Q: return "Q";
    }
    return "unknown";
}

Field field_from_string(std::string_view name) {
    if (name == "E") return Field::E;
    if (name == "u") return Field::u;
    if (name == "sigma") return Field::sigma;
    if (name == "Q") return Field::Q;
    throw std::invalid_argument("analysis: unknown field '" + std::string(name) + "' (expected E, u, sigma or Q)");
}

namespace {

double rho_sq(const TestFunction2D& p, double t, double x) {
    const double a = (t - p.t0) / p.rt;
    const double b = (x - p.x0) / p.rx;
    return a * a + b * b;
}

}  // namespace

double TestFunction2D::operator()(double t, double x) const {
    const double s = 1.0 - rho_sq(*this, t, x);
    if (s <= 0.0) return 0.0;
    return amplitude * std::exp(1.0 - 1.0 / s);
}

double TestFunction2D::d_dt(double t, double x) const {
    const double s = 1.0 - rho_sq(*this, t, x);
    if (s <= 0.0) return 0.0;
    return amplitude * std::exp(1.0 - 1.0 / s) * (-2.0 * (t - t0) / (rt * rt)) / (s * s);
}

double TestFunction2D::d_dx(double t, double x) const {
    const double s = 1.0 - rho_sq(*this, t, x);
    if (s <= 0.0) return 0.0;
    return amplitude * std::exp(1.0 - 1.0 / s) * (-2.0 * (x - x0) / (rx * rx)) / (s * s);
}

RegDerivOperator rebuild_operator(const SpacetimeSolution& sol) {
    const Mollifier m = Mollifier::make(sol.meta.mollifier_kind, sol.meta.mollifier_support);
    return RegDerivOperator(m, sol.meta.nu, sol.grid);
}

std::vector<double> transport_quantity(const FieldState& state, const RegDerivOperator& op) {
    std::vector<double> q = op.apply(state.E);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = state.sigma[i] - q[i];
    return q;
}

std::vector<double> field_values(const FieldState& state, Field field, const RegDerivOperator& op) {
    switch (field) {
        case Field::E: return state.E;
        case Field::u: return state.u;
        case Field::sigma: return state.sigma;
        case Field::Q: return transport_quantity(state, op);
    }
    return {};
}

double pair(const SpacetimeSolution& sol, Field field, const TestFunction2D& psi) {
    if (sol.states.size() < 2) throw std::invalid_argument("pair: solution needs at least two saved states");
    const double t_lo = std::min(sol.times.front(), sol.times.back());
    const double t_hi = std::max(sol.times.front(), sol.times.back());
    if (psi.t0 - psi.rt < t_lo || psi.t0 + psi.rt > t_hi || psi.x0 - psi.rx < sol.grid.x_min ||
        psi.x0 + psi.rx > sol.grid.x_max) {
        std::ostringstream os;
        os << "pair: test function support [" << psi.t0 - psi.rt << ", " << psi.t0 + psi.rt << "] x ["
           << psi.x0 - psi.rx << ", " << psi.x0 + psi.rx << "] leaves the solution window [" << t_lo << ", "
           << t_hi << "] x [" << sol.grid.x_min << ", " << sol.grid.x_max << "]";
        throw std::invalid_argument(os.str());
    }
    std::optional<RegDerivOperator> op;
    if (field == Field::Q) op.emplace(rebuild_operator(sol));

    const double dx = sol.grid.dx();
    std::vector<double> slice(sol.states.size());
    std::vector<double> row(sol.grid.n);
    for (std::size_t k = 0; k < sol.states.size(); ++k) {
        const double t = sol.times[k];
        if (std::abs(t - psi.t0) >= psi.rt) {
            slice[k] = 0.0;
            continue;
        }
        const auto& state = sol.states[k];
        const std::vector<double> values = op ? transport_quantity(state, *op)
                                              : (field == Field::E ? state.E : field == Field::u ? state.u : state.sigma);
        for (std::size_t i = 0; i < sol.grid.n; ++i) row[i] = values[i] * psi(t, sol.grid.x(i));
        slice[k] = trapezoid(row, dx);
    }
    double total = 0.0;
    for (std::size_t k = 1; k < slice.size(); ++k) {
        total += 0.5 * (sol.times[k] - sol.times[k - 1]) * (slice[k] + slice[k - 1]);
    }
    // backward runs store decreasing times
    return sol.times.back() > sol.times.front() ? total : -total;
}

double SupportProbe::worst_relative() const {
    return std::max({relative_E(), relative_u(), relative_sigma()});
}

namespace {

void accumulate_probe(const FieldState& s, const Grid& g, double x0, ProbeSide side, SupportProbe& p) {
    for (std::size_t i = 0; i < g.n; ++i) {
        const double e = std::abs(s.E[i]);
        const double u = std::abs(s.u[i]);
        const double sg = std::abs(s.sigma[i]);
        p.max_E = std::max(p.max_E, e);
        p.max_u = std::max(p.max_u, u);
        p.max_sigma = std::max(p.max_sigma, sg);
        const double x = g.x(i);
        const bool inside = side == ProbeSide::Right ? x >= x0 : x <= x0;
        if (inside) {
            p.sup_E = std::max(p.sup_E, e);
            p.sup_u = std::max(p.sup_u, u);
            p.sup_sigma = std::max(p.sup_sigma, sg);
        }
    }
}

}  // namespace

SupportProbe support_probe(const SpacetimeSolution& sol, double x0, ProbeSide side) {
    SupportProbe p;
    p.x0 = x0;
    p.side = side;
    for (const auto& s : sol.states) accumulate_probe(s, sol.grid, x0, side, p);
    return p;
}

SupportProbe support_probe(const SpacetimeSolution& sol, std::size_t state_index, double x0, ProbeSide side) {
    SupportProbe p;
    p.x0 = x0;
    p.side = side;
    accumulate_probe(sol.states.at(state_index), sol.grid, x0, side, p);
    return p;
}

double transport_residual(const SpacetimeSolution& sol) {
    if (sol.states.size() < 3) throw std::invalid_argument("transport_residual: need at least three saved states");
    const double limit = sol.meta.nu / 4.0;
    for (std::size_t k = 1; k < sol.times.size(); ++k) {
        const double step = std::abs(sol.times[k] - sol.times[k - 1]);
        if (step > limit * (1.0 + 1e-12)) {
            std::ostringstream os;
            os << "transport_residual: save step " << step << " exceeds nu/4 = " << limit
               << "; save more often or reduce dt";
            throw std::invalid_argument(os.str());
        }
    }
    const RegDerivOperator op = rebuild_operator(sol);
    std::vector<std::vector<double>> q;
    q.reserve(sol.states.size());
    for (const auto& s : sol.states) q.push_back(transport_quantity(s, op));

    double worst = 0.0;
    std::vector<double> dq(sol.grid.n);
    for (std::size_t k = 1; k + 1 < q.size(); ++k) {
        // three-point derivative on a possibly uneven time grid
        const double h0 = sol.times[k] - sol.times[k - 1];
        const double h1 = sol.times[k + 1] - sol.times[k];
        const double cm = -h1 / (h0 * (h0 + h1));
        const double c0 = (h1 - h0) / (h0 * h1);
        const double cp = h0 / (h1 * (h0 + h1));
        op.apply(q[k], dq);
        for (std::size_t i = 0; i < sol.grid.n; ++i) {
            const double dt_q = cm * q[k - 1][i] + c0 * q[k][i] + cp * q[k + 1][i];
            worst = std::max(worst, std::abs(dt_q + dq[i]));
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------

std::string Verdict::str() const {
    std::string base;
    switch (kind) {
        case VerdictKind::Converging: base = "converging"; break;
        case VerdictKind::Diverging: base = "diverging"; break;
        case VerdictKind::Inconclusive: base = "inconclusive"; break;
    }
    return reason.empty() ? base : base + " (" + reason + ")";
}

Verdict classify(std::span<const double> pairings, std::optional<double> target,
                 std::span<const double> right_support_relative) {
    const std::size_t n = pairings.size();
    if (n < 2) return {VerdictKind::Inconclusive, "too few members"};

    if (target && *target != 0.0) {
        const double gap = 0.5 * std::abs(*target);
        const bool bounded_away =
            std::all_of(pairings.begin(), pairings.end(), [&](double p) { return std::abs(p - *target) >= gap; });
        if (bounded_away) {
            const bool confined = !right_support_relative.empty() &&
                                  std::all_of(right_support_relative.begin(), right_support_relative.end(),
                                              [](double r) { return r <= 1e-8; });
            return {VerdictKind::Diverging, confined ? "support obstruction" : "bounded away from target"};
        }
    }

    std::vector<double> inc;
    for (std::size_t i = 1; i < n; ++i) inc.push_back(std::abs(pairings[i] - pairings[i - 1]));
    double scale = 0.0;
    for (double p : pairings) scale = std::max(scale, std::abs(p));
    const double negligible = 1e-13 * std::max(scale, 1e-300);
    const std::size_t tail = std::min<std::size_t>(3, inc.size());
    const std::size_t first = inc.size() - tail;
    if (std::all_of(inc.begin() + static_cast<long>(first), inc.end(), [&](double d) { return d <= negligible; })) {
        return {VerdictKind::Converging, ""};
    }
    bool decreasing = true, increasing = true;
    for (std::size_t i = first + 1; i < inc.size(); ++i) {
        if (!(inc[i] < inc[i - 1])) decreasing = false;
        if (!(inc[i] > inc[i - 1])) increasing = false;
    }
    if (tail < 2) return {VerdictKind::Inconclusive, "single increment"};
    if (decreasing) return {VerdictKind::Converging, ""};
    if (increasing) return {VerdictKind::Diverging, "growing increments"};
    return {VerdictKind::Inconclusive, ""};
}

SweepResult limit_sweep(const RunFactory& run, std::span<const double> eps_schedule,
                        std::span<const Observable> observables, int workers) {
    for (std::size_t i = 1; i < eps_schedule.size(); ++i) {
        if (!(eps_schedule[i] < eps_schedule[i - 1])) {
            throw std::invalid_argument("limit_sweep: eps schedule must be strictly decreasing");
        }
    }
    SweepResult result;
    result.eps_schedule.assign(eps_schedule.begin(), eps_schedule.end());
    result.observables.assign(observables.begin(), observables.end());
    result.members.resize(eps_schedule.size());

    std::atomic<std::size_t> next{0};
    const auto worker = [&]() {
        for (std::size_t k = next++; k < eps_schedule.size(); k = next++) {
            SweepMember& m = result.members[k];
            m.eps = eps_schedule[k];
            try {
                const SpacetimeSolution sol = run(m.eps);
                m.status = sol.meta.status;
                m.message = sol.meta.message;
                if (sol.meta.status == RunStatus::GuardAbort || sol.meta.status == RunStatus::Overflow) {
                    continue;
                }
                for (const auto& obs : observables) {
                    m.pairings.push_back(pair(sol, obs.field, obs.psi));
                    m.right_support_relative.push_back(
                        support_probe(sol, obs.psi.x0 - obs.psi.rx, ProbeSide::Right).worst_relative());
                }
                m.ok = true;
            } catch (const std::exception& e) {
                m.message = e.what();
            }
        }
    };
    const int pool = std::max(1, std::min<int>(workers, static_cast<int>(eps_schedule.size())));
    if (pool == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int i = 0; i < pool; ++i) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }

    std::vector<const SweepMember*> good;
    for (const auto& m : result.members) {
        if (m.ok) good.push_back(&m);
        else result.partial = true;
    }
    for (std::size_t o = 0; o < observables.size(); ++o) {
        std::vector<double> p, support;
        for (const auto* m : good) {
            p.push_back(m->pairings[o]);
            support.push_back(m->right_support_relative[o]);
        }
        std::vector<double> inc;
        for (std::size_t i = 1; i < p.size(); ++i) inc.push_back(std::abs(p[i] - p[i - 1]));
        result.increments.push_back(inc);
        result.verdicts.push_back(classify(p, observables[o].target, support));
    }
    return result;
}

double diagonal_delta_pairing(const TestFunction2D& psi) {
    const double lo = std::max(psi.t0 - psi.rt, psi.x0 - psi.rx);
    const double hi = std::min(psi.t0 + psi.rt, psi.x0 + psi.rx);
    if (!(lo < hi)) return 0.0;
    return integrate([&](double t) { return psi(t, t); }, lo, hi, 1e-12);
}

// ---------------------------------------------------------------------------

LinearizedValues linearized_reference(double q, double t, double x) {
    const auto heaviside = [](double s) { return s > 0.0 ? 1.0 : (s < 0.0 ? 0.0 : 0.5); };
    const double window = heaviside(x) - heaviside(x - t);
    return {q * window, q * (t - x) * window};
}

double linearized_sigma_pairing(double q, const TestFunction2D& psi) {
    if (std::abs(psi.x0) >= psi.rx) return 0.0;
    return q * integrate([&](double t) { return psi(t, 0.0); }, psi.t0 - psi.rt, psi.t0 + psi.rt, 1e-12);
}

double WeakFormCheck::max_mismatch() const {
    return std::max({std::abs(e_lhs - e_rhs), std::abs(u_lhs - u_rhs), std::abs(s_lhs - s_rhs)});
}

namespace {

/// Composite 30-point Gauss-Legendre rule; integrands here are smooth on [a, b].
template <typename F>
double panel_gauss(F&& f, double a, double b, int panels = 6) {
    const double h = (b - a) / panels;
    double total = 0.0;
    for (int k = 0; k < panels; ++k) {
        total += boost::math::quadrature::gauss<double, 30>::integrate(f, a + k * h, a + (k + 1) * h);
    }
    return total;
}

/// Integral of g(t, x) over the wedge 0 < x < t intersected with psi's support.
/// The inner integral runs over the ellipse chord at t; the outer one is split
/// where the chord ends cross x = 0 or x = t.
double wedge_integral(const TestFunction2D& psi, const std::function<double(double, double)>& g) {
    const double t_lo = std::max(psi.t0 - psi.rt, 0.0);
    const double t_hi = psi.t0 + psi.rt;
    if (!(t_lo < t_hi)) return 0.0;
    const auto half_chord = [&](double t) {
        const double s = (t - psi.t0) / psi.rt;
        return psi.rx * std::sqrt(std::max(0.0, 1.0 - s * s));
    };
    const auto inner = [&](double t) {
        const double h = half_chord(t);
        const double a = std::max(psi.x0 - h, 0.0);
        const double b = std::min(psi.x0 + h, t);
        if (!(a < b)) return 0.0;
        return panel_gauss([&](double x) { return g(t, x); }, a, b);
    };

    std::vector<double> cuts{t_lo, t_hi};
    // chord end on x = 0
    if (std::abs(psi.x0) < psi.rx) {
        const double s = std::sqrt(1.0 - (psi.x0 / psi.rx) * (psi.x0 / psi.rx));
        cuts.push_back(psi.t0 - psi.rt * s);
        cuts.push_back(psi.t0 + psi.rt * s);
    }
    // chord end on x = t: ((t - x0)/rx)^2 + ((t - t0)/rt)^2 = 1
    {
        const double A = 1.0 / (psi.rx * psi.rx) + 1.0 / (psi.rt * psi.rt);
        const double B = -2.0 * (psi.x0 / (psi.rx * psi.rx) + psi.t0 / (psi.rt * psi.rt));
        const double C = (psi.x0 / psi.rx) * (psi.x0 / psi.rx) + (psi.t0 / psi.rt) * (psi.t0 / psi.rt) - 1.0;
        const double disc = B * B - 4.0 * A * C;
        if (disc > 0.0) {
            cuts.push_back((-B - std::sqrt(disc)) / (2.0 * A));
            cuts.push_back((-B + std::sqrt(disc)) / (2.0 * A));
        }
    }
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    double prev = t_lo;
    for (double c : cuts) {
        if (c <= prev || c > t_hi) continue;
        total += panel_gauss(inner, prev, c);
        prev = c;
    }
    return total;
}

}  // namespace

WeakFormCheck check_linearized_weak_form(double q, const TestFunction2D& psi) {
    if (psi.t0 - psi.rt <= 0.0) throw std::invalid_argument("check_linearized_weak_form: psi must be supported in t > 0");
    WeakFormCheck c{};
    c.e_lhs = -q * wedge_integral(psi, [&](double t, double x) { return psi.d_dt(t, x) + psi.d_dx(t, x); });
    c.e_rhs = linearized_sigma_pairing(q, psi);
    c.u_lhs = -q * wedge_integral(psi, [&](double t, double x) { return (t - x) * psi.d_dt(t, x); });
    c.u_rhs = q * wedge_integral(psi, [&](double t, double x) { return psi(t, x); });
    c.s_lhs = std::abs(psi.x0) >= psi.rx
                  ? 0.0
                  : -q * integrate([&](double t) { return psi.d_dt(t, 0.0); }, psi.t0 - psi.rt, psi.t0 + psi.rt, 1e-12);
    c.s_rhs = 0.0;
    return c;
}

LinearizedComparison compare_linearized(const SpacetimeSolution& sol, double q) {
    LinearizedComparison c;
    const double dx = sol.grid.dx();
    std::vector<double> de(sol.grid.n), du(sol.grid.n);
    for (std::size_t k = 0; k < sol.states.size(); ++k) {
        const auto& s = sol.states[k];
        for (std::size_t i = 0; i < sol.grid.n; ++i) {
            const LinearizedValues ref = linearized_reference(q, s.t, sol.grid.x(i));
            de[i] = std::abs(s.E[i] - ref.E);
            du[i] = std::abs(s.u[i] - ref.u);
        }
        c.times.push_back(s.t);
        c.err_E.push_back(trapezoid(de, dx));
        c.err_u.push_back(trapezoid(du, dx));
        c.max_err_E = std::max(c.max_err_E, c.err_E.back());
        c.max_err_u = std::max(c.max_err_u, c.err_u.back());
    }
    return c;
}

double blow_up_peak(const SpacetimeSolution& sol, double center, double window) {
    double peak = 0.0;
    for (const auto& s : sol.states) {
        for (std::size_t i = 0; i < sol.grid.n; ++i) {
            if (std::abs(sol.grid.x(i) - center) > window) continue;
            peak = std::max(peak, std::abs(s.sigma[i] * nonlinearity::a(s.u[i])));
        }
    }
    return peak;
}

BlowUpReport blow_up_probe(std::span<const double> eps, std::span<const double> peaks) {
    if (eps.size() != peaks.size()) throw std::invalid_argument("blow_up_probe: eps and peaks differ in length");
    BlowUpReport r;
    r.eps.assign(eps.begin(), eps.end());
    r.peaks.assign(peaks.begin(), peaks.end());
    if (eps.size() < 2) return r;
    if (std::any_of(peaks.begin(), peaks.end(), [](double p) { return !(p > 0.0); })) return r;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) {
        const double x = std::log(1.0 / eps[i]);
        const double y = std::log(peaks[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    r.exponent = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
    return r;
}

}  // namespace regfield
