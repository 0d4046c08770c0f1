// regfield command line: one subcommand per experiment, config-driven,
// CSV data plus a JSON summary in the output directory.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "regfield/analysis.hpp"
#include "regfield/config.hpp"
#include "regfield/io.hpp"
#include "regfield/scaling.hpp"
#include "regfield/solver.hpp"
#include "regfield/trajectories.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace regfield;

namespace {

enum ExitCode : int { kOk = 0, kConfig = 2, kGuard = 3, kContaminated = 4 };

struct Context {
    RunConfig cfg;
    std::string config_text;
    std::string run_id;
    fs::path out;
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError({"config: cannot open " + path.string()});
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_summary(const Context& ctx, json summary) {
    summary["run_id"] = ctx.run_id;
    summary["seed"] = ctx.cfg.seed;
    std::ofstream out(ctx.out / "summary.json", std::ios::binary);
    out << summary.dump(2) << "\n";
}

int exit_for(RunStatus status) {
    switch (status) {
        case RunStatus::Clean: return kOk;
        case RunStatus::GuardAbort:
        case RunStatus::Overflow: return kGuard;
        case RunStatus::BoundaryContaminated: return kContaminated;
    }
    return kOk;
}

json status_json(const SpacetimeSolution& sol) {
    return {{"status", std::string(to_string(sol.meta.status))},
            {"message", sol.meta.message},
            {"a_priori_bound", sol.meta.a_priori_bound},
            {"guard_factor", sol.meta.guard_factor},
            {"dt", sol.meta.dt},
            {"nu", sol.meta.nu},
            {"eps", sol.meta.eps},
            {"saved_states", sol.states.size()}};
}

std::vector<double> schedule_or_model_eps(const RunConfig& cfg) {
    if (!cfg.experiment.eps_schedule.empty()) return cfg.experiment.eps_schedule;
    return {cfg.model.eps};
}

int cmd_validate(const Context& ctx) {
    const auto problems = validate_all(ctx.cfg);
    for (const auto& p : problems) std::cerr << "invalid: " << p << "\n";
    write_summary(ctx, {{"command", "validate"}, {"valid", problems.empty()}, {"problems", problems}});
    if (problems.empty()) std::cout << "config ok\n";
    return problems.empty() ? kOk : kConfig;
}

int cmd_solve(const Context& ctx) {
    const SpacetimeSolution sol = run_single(ctx.cfg, ctx.cfg.model.eps);
    io::write_solution(ctx.out, sol, ctx.run_id);
    double drift = 0.0;
    const double q0 = total_charge(sol.states.front(), sol.grid);
    double sup = 0.0;
    for (const auto& s : sol.states) {
        drift = std::max(drift, std::abs(total_charge(s, sol.grid) - q0));
        sup = std::max(sup, s.sup_norm());
    }
    json summary = status_json(sol);
    summary["command"] = "solve";
    summary["charge_initial"] = q0;
    summary["charge_max_drift"] = drift;
    summary["max_abs_field"] = sup;
    write_summary(ctx, summary);
    std::cout << "solve: " << to_string(sol.meta.status) << ", " << sol.states.size() << " states, max|V| = " << sup
              << ", bound = " << sol.meta.a_priori_bound << "\n";
    return exit_for(sol.meta.status);
}

int cmd_sweep(const Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    std::vector<Observable> observables;
    for (const auto& spec : cfg.experiment.observables) {
        Observable o{spec.name, spec.field, spec.psi, spec.target_value};
        if (spec.target_rule && *spec.target_rule == "diagonal") o.target = cfg.model.q * diagonal_delta_pairing(spec.psi);
        observables.push_back(o);
    }
    if (cfg.experiment.eps_schedule.size() < 2) throw ConfigError({"sweep: experiment.eps_schedule needs >= 2 values"});
    const SweepResult res = limit_sweep([&](double eps) { return run_single(cfg, eps); }, cfg.experiment.eps_schedule,
                                        observables, cfg.workers);

    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < res.members.size(); ++k) {
        const auto& m = res.members[k];
        if (!m.ok) continue;
        for (std::size_t o = 0; o < observables.size(); ++o) {
            rows.push_back({m.eps, static_cast<double>(o), m.pairings[o], m.right_support_relative[o]});
        }
    }
    io::write_csv(ctx.out / "sweep.csv", {"eps", "observable", "pairing", "right_support_relative"}, rows);

    json obs = json::array();
    for (std::size_t o = 0; o < observables.size(); ++o) {
        json target = observables[o].target ? json(*observables[o].target) : json(nullptr);
        obs.push_back({{"index", o},
                       {"name", observables[o].name},
                       {"field", std::string(to_string(observables[o].field))},
                       {"target", target},
                       {"increments", res.increments[o]},
                       {"verdict", res.verdicts[o].str()}});
        std::cout << "sweep: " << observables[o].name << " -> " << res.verdicts[o].str() << "\n";
    }
    json members = json::array();
    for (const auto& m : res.members) {
        members.push_back({{"eps", m.eps}, {"ok", m.ok}, {"status", std::string(to_string(m.status))},
                           {"message", m.message}});
    }
    write_summary(ctx, {{"command", "sweep"}, {"observables", obs}, {"members", members}, {"partial", res.partial}});
    return res.partial ? kGuard : kOk;
}

int cmd_check_support(const Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const auto& ex = cfg.experiment;
    std::vector<std::vector<double>> rows;
    json runs = json::array();
    bool all_pass = true;
    int code = kOk;
    for (double eps : schedule_or_model_eps(cfg)) {
        const SpacetimeSolution sol = run_single(cfg, eps);
        code = std::max(code, exit_for(sol.meta.status));
        const SupportProbe total = support_probe(sol, ex.probe_x0, ex.probe_side);
        for (std::size_t k = 0; k < sol.states.size(); ++k) {
            SupportProbe p = support_probe(sol, k, ex.probe_x0, ex.probe_side);
            rows.push_back({eps, sol.times[k], p.sup_E, p.sup_u, p.sup_sigma, p.sup_E / std::max(total.max_E, 1e-300),
                            p.sup_u / std::max(total.max_u, 1e-300), p.sup_sigma / std::max(total.max_sigma, 1e-300)});
        }
        const bool pass = total.worst_relative() <= ex.probe_tolerance;
        all_pass = all_pass && pass;
        json run = status_json(sol);
        run["relative"] = {{"E", total.relative_E()}, {"u", total.relative_u()}, {"sigma", total.relative_sigma()}};
        run["pass"] = pass;
        runs.push_back(run);
        std::cout << "check-support: eps = " << eps << " worst relative = " << total.worst_relative()
                  << (pass ? " (pass)" : " (fail)") << "\n";
    }
    io::write_csv(ctx.out / "support.csv", {"eps", "t", "sup_E", "sup_u", "sup_sigma", "rel_E", "rel_u", "rel_sigma"},
                  rows);
    write_summary(ctx, {{"command", "check-support"},
                        {"probe_x0", ex.probe_x0},
                        {"probe_side", ex.probe_side == ProbeSide::Right ? "right" : "left"},
                        {"tolerance", ex.probe_tolerance},
                        {"runs", runs},
                        {"pass", all_pass}});
    return code;
}

int cmd_compare_lin(const Context& ctx) {
    const SpacetimeSolution sol = run_single(ctx.cfg, ctx.cfg.model.eps);
    const LinearizedComparison c = compare_linearized(sol, ctx.cfg.model.q);
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < c.times.size(); ++k) rows.push_back({c.times[k], c.err_E[k], c.err_u[k]});
    io::write_csv(ctx.out / "compare_lin.csv", {"t", "l1_err_E", "l1_err_u"}, rows);
    json summary = status_json(sol);
    summary["command"] = "compare-lin";
    summary["q"] = ctx.cfg.model.q;
    summary["max_l1_err_E"] = c.max_err_E;
    summary["max_l1_err_u"] = c.max_err_u;
    write_summary(ctx, summary);
    std::cout << "compare-lin: max L1 error E = " << c.max_err_E << ", u = " << c.max_err_u << "\n";
    return exit_for(sol.meta.status);
}

int cmd_probe_blowup(const Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    std::vector<double> eps, peaks;
    int code = kOk;
    for (double e : schedule_or_model_eps(cfg)) {
        const SpacetimeSolution sol = run_single(cfg, e);
        code = std::max(code, exit_for(sol.meta.status));
        eps.push_back(e);
        peaks.push_back(blow_up_peak(sol, cfg.experiment.blowup_center, cfg.experiment.blowup_window));
    }
    const BlowUpReport rep = blow_up_probe(eps, peaks);
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < eps.size(); ++k) rows.push_back({eps[k], peaks[k]});
    io::write_csv(ctx.out / "blowup.csv", {"eps", "peak_sigma_a_u"}, rows);
    write_summary(ctx, {{"command", "probe-blowup"}, {"eps", eps}, {"peaks", peaks}, {"exponent", rep.exponent}});
    std::cout << "probe-blowup: fitted exponent " << rep.exponent << "\n";
    return code;
}

int cmd_trajectories(const Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const auto& ex = cfg.experiment;
    const SpacetimeSolution sol = run_single(cfg, cfg.model.eps);
    json list = json::array();
    for (std::size_t k = 0; k < ex.starts.size(); ++k) {
        const auto& s = ex.starts[k];
        const Trajectory traj = integrate_world_line(sol, s.t0, s.x0, ex.r_end, ex.dr);
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < traj.r.size(); ++i) rows.push_back({traj.r[i], traj.w[i]});
        char name[32];
        std::snprintf(name, sizeof name, "traj_%03zu.csv", k);
        io::write_csv(ctx.out / name, {"r", "w"}, rows);
        list.push_back({{"file", name}, {"t0", s.t0}, {"x0", s.x0}, {"exited", traj.exited},
                        {"max_speed", max_speed(traj)}, {"samples", traj.r.size()}});
    }
    json summary = status_json(sol);
    summary["command"] = "trajectories";
    summary["trajectories"] = list;
    write_summary(ctx, summary);
    std::cout << "trajectories: " << ex.starts.size() << " world lines written\n";
    return exit_for(sol.meta.status);
}

int cmd_check_scaling(const Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    std::vector<double> grid = cfg.experiment.eps_grid;
    if (grid.empty()) grid = log_spaced_decreasing(1e-3, 1e-12, 10);
    json reports = json::array();
    std::printf("%-8s %-4s %-24s %-24s %-24s\n", "kind", "p", "eps", "h", "ratio");
    for (int p : cfg.experiment.p_values) {
        const GrowthReport rep = verify_growth_condition(cfg.scaling, p, grid);
        std::vector<std::vector<double>> rows;
        for (const auto& s : rep.samples) {
            rows.push_back({s.eps, s.h, s.ratio});
            std::printf("%-8s %-4d %-24s %-24s %-24s\n", std::string(to_string(cfg.scaling.kind)).c_str(), p,
                        io::format_double(s.eps).c_str(), io::format_double(s.h).c_str(),
                        io::format_double(s.ratio).c_str());
        }
        io::write_csv(ctx.out / ("scaling_p" + std::to_string(p) + ".csv"), {"eps", "h", "ratio"}, rows);
        reports.push_back({{"p", p}, {"k_estimate", rep.k_estimate}, {"satisfied", rep.satisfied}});
        std::printf("p = %d: k_estimate = %s, satisfied = %s\n", p, io::format_double(rep.k_estimate).c_str(),
                    rep.satisfied ? "true" : "false");
    }
    write_summary(ctx, {{"command", "check-scaling"},
                        {"scaling", {{"kind", std::string(to_string(cfg.scaling.kind))},
                                     {"c", cfg.scaling.c},
                                     {"exponent", cfg.scaling.exponent}}},
                        {"reports", reports}});
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Regularized-derivative solver for the 1+1 dimensional Maxwell-Lorentz model"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    int workers = 0;
    std::uint64_t seed = 0;
    bool seed_given = false;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "Run configuration (JSON)")->required();
        sub->add_option("--out", out_dir, "Output directory");
        sub->add_option("--workers", workers, "Concurrent sweep members");
        sub->add_option_function<std::uint64_t>(
            "--seed", [&](const std::uint64_t& s) { seed = s; seed_given = true; }, "Seed for randomized inputs");
    };

    using Handler = int (*)(const Context&);
    const std::vector<std::tuple<const char*, const char*, Handler>> commands = {
        {"validate", "Check every precondition without running", cmd_validate},
        {"solve", "Solve once at model.eps and write the solution", cmd_solve},
        {"sweep", "Pair runs over an eps schedule with test functions", cmd_sweep},
        {"check-support", "One-sided support probe", cmd_check_support},
        {"compare-lin", "Compare against the linearized closed form", cmd_compare_lin},
        {"probe-blowup", "Peak of |sigma a(u)| near the charge over eps", cmd_probe_blowup},
        {"trajectories", "Integrate world lines through the solved velocity", cmd_trajectories},
        {"check-scaling", "Finite-grid growth condition report for h(eps)", cmd_check_scaling},
    };
    std::vector<std::pair<CLI::App*, Handler>> subs;
    for (const auto& [name, help, handler] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        add_common(sub);
        subs.emplace_back(sub, handler);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        Context ctx;
        ctx.config_text = read_file(config_path);
        ctx.cfg = parse_config(ctx.config_text);
        if (workers > 0) ctx.cfg.workers = workers;
        if (seed_given) ctx.cfg.seed = seed;
        ctx.run_id = run_id(ctx.config_text + "#seed=" + std::to_string(ctx.cfg.seed));
        ctx.out = out_dir;
        fs::create_directories(ctx.out);
        {
            std::ofstream copy(ctx.out / "config.json", std::ios::binary);
            copy << ctx.config_text;
        }
        for (const auto& [sub, handler] : subs) {
            if (sub->parsed()) return handler(ctx);
        }
    } catch (const ConfigError& e) {
        for (const auto& p : e.problems()) std::cerr << "config error: " << p << "\n";
        return kConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const PicardError& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kGuard;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kOk;
}
