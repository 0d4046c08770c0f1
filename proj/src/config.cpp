#include "regfield/config.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

namespace regfield {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) out += "; ";
        out += s;
    }
    return out;
}

/// Collects problems while reading optional keys with defaults.
class Reader {
public:
    std::vector<std::string> problems;

    template <typename T>
    T get(const json& obj, const char* key, T fallback, const std::string& where) {
        if (!obj.is_object() || !obj.contains(key)) return fallback;
        try {
            return obj.at(key).get<T>();
        } catch (const std::exception&) {
            problems.push_back("config: " + where + "." + key + " has the wrong type");
            return fallback;
        }
    }

    template <typename Enum, typename Parse>
    Enum parse_enum(const json& obj, const char* key, Enum fallback, const std::string& where, Parse&& parse) {
        const auto name = get<std::string>(obj, key, "", where);
        if (name.empty()) return fallback;
        try {
            return parse(name);
        } catch (const std::exception& e) {
            problems.push_back(e.what());
            return fallback;
        }
    }
};

Profile parse_profile(Reader& r, const json& j, const std::string& where) {
    Profile p;
    const auto type = r.get<std::string>(j, "type", "zero", where);
    if (type == "zero") p.type = Profile::Type::Zero;
    else if (type == "constant") p.type = Profile::Type::Constant;
    else if (type == "gaussian") p.type = Profile::Type::Gaussian;
    else if (type == "delta_net") p.type = Profile::Type::DeltaNet;
    else r.problems.push_back("config: " + where + ".type '" + type + "' is not zero, constant, gaussian or delta_net");
    p.value = r.get<double>(j, "value", 0.0, where);
    p.amplitude = r.get<double>(j, "amplitude", 0.0, where);
    p.center = r.get<double>(j, "center", 0.0, where);
    p.width = r.get<double>(j, "width", 1.0, where);
    if (p.type == Profile::Type::Gaussian && !(p.width > 0.0)) {
        r.problems.push_back("config: " + where + ".width must be positive");
    }
    return p;
}

TestFunction2D parse_psi(Reader& r, const json& j, const std::string& where) {
    TestFunction2D psi;
    psi.t0 = r.get<double>(j, "t0", 0.0, where);
    psi.x0 = r.get<double>(j, "x0", 0.0, where);
    psi.rt = r.get<double>(j, "rt", 0.1, where);
    psi.rx = r.get<double>(j, "rx", 0.1, where);
    psi.amplitude = r.get<double>(j, "amplitude", 1.0, where);
    if (!(psi.rt > 0.0) || !(psi.rx > 0.0)) r.problems.push_back("config: " + where + " radii must be positive");
    return psi;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join(problems)), problems_(std::move(problems)) {}

double Profile::eval(double x) const {
    switch (type) {
        case Type::Zero: return 0.0;
        case Type::Constant: return value;
        case Type::Gaussian: {
            const double s = (x - center) / width;
            return amplitude * std::exp(-s * s);
        }
        case Type::DeltaNet: return 0.0;  // sampled separately
    }
    return 0.0;
}

RunConfig parse_config(std::string_view json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("config: not valid JSON: ") + e.what()});
    }
    if (!root.is_object()) throw ConfigError({"config: top level must be an object"});

    Reader r;
    RunConfig cfg;
    const json empty = json::object();
    const auto section = [&](const char* key) -> const json& { return root.contains(key) ? root.at(key) : empty; };

    const json& grid = section("grid");
    cfg.grid.x_min = r.get<double>(grid, "x_min", -10.0, "grid");
    cfg.grid.x_max = r.get<double>(grid, "x_max", 10.0, "grid");
    if (grid.contains("dx")) {
        const double dx = r.get<double>(grid, "dx", 0.01, "grid");
        if (dx > 0.0 && cfg.grid.x_max > cfg.grid.x_min) {
            cfg.grid = Grid::with_spacing(cfg.grid.x_min, cfg.grid.x_max, dx);
        } else {
            r.problems.push_back("config: grid.dx must be positive with x_min < x_max");
        }
    } else {
        cfg.grid.n = r.get<std::size_t>(grid, "n", 2001, "grid");
    }

    const json& model = section("model");
    cfg.model.B0 = r.get<double>(model, "B0", 0.0, "model");
    cfg.model.T = r.get<double>(model, "T", 0.5, "model");
    cfg.model.eps = r.get<double>(model, "eps", 0.1, "model");
    cfg.model.q = r.get<double>(model, "q", 1.0, "model");
    cfg.model.velocity_coupling = r.get<bool>(model, "velocity_coupling", true, "model");

    const json& moll = section("mollifier");
    cfg.mollifier.kind = r.parse_enum(moll, "kind", MollifierKind::SymmetricBump, "mollifier",
                                      [](std::string_view s) { return mollifier_kind_from_string(s); });
    const double default_lo = cfg.mollifier.kind == MollifierKind::RightBump ? 0.0 : -1.0;
    const double default_hi = cfg.mollifier.kind == MollifierKind::LeftBump ? 0.0 : 1.0;
    cfg.mollifier.support.lo = r.get<double>(moll, "s_lo", default_lo, "mollifier");
    cfg.mollifier.support.hi = r.get<double>(moll, "s_hi", default_hi, "mollifier");

    const json& scal = section("scaling");
    cfg.scaling.kind = r.parse_enum(scal, "kind", ScalingKind::Constant, "scaling",
                                    [](std::string_view s) { return scaling_kind_from_string(s); });
    cfg.scaling.c = r.get<double>(scal, "c", 0.1, "scaling");
    cfg.scaling.exponent = r.get<double>(scal, "exponent", 1.0, "scaling");

    const json& net = section("delta_net");
    const auto profile = r.get<std::string>(net, "profile", "bump", "delta_net");
    if (profile != "bump") r.problems.push_back("config: delta_net.profile '" + profile + "' is not supported (bump)");
    cfg.delta_net.center = r.get<double>(net, "center", 0.0, "delta_net");
    cfg.delta_net.anchor = r.parse_enum(net, "anchor", NetAnchor::Centered, "delta_net",
                                        [](std::string_view s) { return net_anchor_from_string(s); });
    cfg.delta_net.width.factor = r.get<double>(net, "width_factor", 1.0, "delta_net");
    cfg.delta_net.width.power = r.get<double>(net, "width_power", 1.0, "delta_net");

    const json& init = section("initial");
    cfg.E0 = parse_profile(r, init.contains("E") ? init.at("E") : empty, "initial.E");
    cfg.u0 = parse_profile(r, init.contains("u") ? init.at("u") : empty, "initial.u");
    cfg.sigma0 = parse_profile(r, init.contains("sigma") ? init.at("sigma") : empty, "initial.sigma");
    if (cfg.E0.type == Profile::Type::DeltaNet || cfg.u0.type == Profile::Type::DeltaNet) {
        r.problems.push_back("config: delta_net initial data is only available for sigma");
    }

    const json& sol = section("solver");
    cfg.solver.method = r.parse_enum(sol, "method", SolverMethod::LinesRK4, "solver",
                                     [](std::string_view s) { return solver_method_from_string(s); });
    cfg.solver.dt = r.get<double>(sol, "dt", 0.0, "solver");
    cfg.solver.picard_tol = r.get<double>(sol, "picard_tol", 1e-10, "solver");
    cfg.solver.picard_max_iter = r.get<int>(sol, "picard_max_iter", 200, "solver");
    cfg.solver.picard_horizon = r.get<double>(sol, "picard_horizon", 0.0, "solver");
    cfg.solver.save_every = r.get<int>(sol, "save_every", 1, "solver");
    cfg.solver.guard_factor = r.get<double>(sol, "guard_factor", 10.0, "solver");
    cfg.solver.backward = r.get<bool>(sol, "backward", false, "solver");

    cfg.perturbation = r.get<double>(root, "perturbation", 0.0, "root");
    cfg.workers = r.get<int>(root, "workers", 1, "root");
    cfg.seed = r.get<std::uint64_t>(root, "seed", 0, "root");

    const json& ex = section("experiment");
    auto& e = cfg.experiment;
    e.eps_schedule = r.get<std::vector<double>>(ex, "eps_schedule", {}, "experiment");
    e.probe_x0 = r.get<double>(ex, "probe_x0", 0.0, "experiment");
    const auto side = r.get<std::string>(ex, "probe_side", "right", "experiment");
    if (side == "right") e.probe_side = ProbeSide::Right;
    else if (side == "left") e.probe_side = ProbeSide::Left;
    else r.problems.push_back("config: experiment.probe_side must be left or right");
    e.probe_tolerance = r.get<double>(ex, "probe_tolerance", 1e-8, "experiment");
    e.blowup_center = r.get<double>(ex, "blowup_center", 0.0, "experiment");
    e.blowup_window = r.get<double>(ex, "blowup_window", 0.5, "experiment");
    e.r_end = r.get<double>(ex, "r_end", cfg.model.T, "experiment");
    e.dr = r.get<double>(ex, "dr", 0.01, "experiment");
    e.p_values = r.get<std::vector<int>>(ex, "p_values", {1, 2}, "experiment");
    e.eps_grid = r.get<std::vector<double>>(ex, "eps_grid", {}, "experiment");
    e.refine_grid = r.get<bool>(ex, "refine_grid", true, "experiment");
    if (ex.contains("starts")) {
        for (const auto& s : ex.at("starts")) {
            if (s.is_array() && s.size() == 2 && s[0].is_number() && s[1].is_number()) {
                e.starts.push_back({s[0].get<double>(), s[1].get<double>()});
            } else {
                r.problems.push_back("config: experiment.starts entries must be [t0, x0] pairs");
            }
        }
    }
    if (ex.contains("observables")) {
        int index = 0;
        for (const auto& o : ex.at("observables")) {
            const std::string where = "experiment.observables[" + std::to_string(index++) + "]";
            ObservableSpec spec;
            spec.name = r.get<std::string>(o, "name", where, where);
            spec.field = r.parse_enum(o, "field", Field::Q, where, [](std::string_view s) { return field_from_string(s); });
            spec.psi = parse_psi(r, o, where);
            if (o.contains("target")) {
                if (o.at("target").is_string()) {
                    spec.target_rule = o.at("target").get<std::string>();
                    if (*spec.target_rule != "diagonal") {
                        r.problems.push_back("config: " + where + ".target must be a number or \"diagonal\"");
                    }
                } else if (o.at("target").is_number()) {
                    spec.target_value = o.at("target").get<double>();
                } else if (!o.at("target").is_null()) {
                    r.problems.push_back("config: " + where + ".target must be a number or \"diagonal\"");
                }
            }
            e.observables.push_back(spec);
        }
    }

    if (!r.problems.empty()) throw ConfigError(r.problems);
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError({"config: cannot open " + path.string()});
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

Grid grid_for(const RunConfig& cfg, double eps) {
    Grid g = cfg.grid;
    if (!cfg.experiment.refine_grid) return g;
    double dx_max = g.dx();
    try {
        dx_max = std::min(dx_max, cfg.scaling(eps) / 4.0);
        if (cfg.sigma0.type == Profile::Type::DeltaNet) dx_max = std::min(dx_max, cfg.delta_net.width(eps) / 4.0);
    } catch (const std::exception&) {
        return g;  // reported by validate()
    }
    if (dx_max < g.dx() * (1.0 - 1e-12)) return Grid::with_spacing(g.x_min, g.x_max, dx_max);
    return g;
}

std::vector<std::string> validate(const RunConfig& cfg, double eps) {
    std::vector<std::string> problems;
    const auto check = [&](auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            problems.emplace_back(e.what());
        }
    };
    const std::string at = " (eps = " + std::to_string(eps) + ")";

    check([&] { cfg.grid.validate(); });
    check([&] { cfg.scaling.validate(); });
    if (!(cfg.model.T > 0.0)) problems.emplace_back("model: T must be positive");
    if (cfg.solver.save_every < 1) problems.emplace_back("solver: save_every must be >= 1");
    if (!(cfg.solver.guard_factor >= 1.0)) problems.emplace_back("solver: guard_factor must be >= 1");
    if (cfg.solver.dt < 0.0) problems.emplace_back("solver: dt must be nonnegative");
    if (cfg.workers < 1) problems.emplace_back("cli: workers must be >= 1");
    if (!problems.empty()) return problems;

    double nu = 0.0;
    check([&] { nu = cfg.scaling(eps); });
    std::optional<Mollifier> moll;
    check([&] { moll = Mollifier::make(cfg.mollifier.kind, cfg.mollifier.support); });
    if (!problems.empty()) {
        for (auto& p : problems) p += at;
        return problems;
    }
    const Grid g = grid_for(cfg, eps);
    std::optional<RegDerivOperator> op;
    check([&] { op.emplace(*moll, nu, g); });
    if (op && cfg.solver.method == SolverMethod::LinesRK4 && cfg.solver.dt > 0.0 &&
        cfg.solver.dt > step_bound(*op) * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "solver: dt = " << cfg.solver.dt << " exceeds the step bound 0.5 nu / ||phi'||_1 = " << step_bound(*op);
        problems.push_back(os.str());
    }
    std::optional<FieldState> initial;
    check([&] { initial = build_initial(cfg, g, eps); });
    if (initial && boundary_contaminated(*initial)) {
        problems.emplace_back("fields: initial data is not negligible near the grid boundary; widen the grid");
    }
    for (auto& p : problems) p += at;
    return problems;
}

std::vector<std::string> validate_all(const RunConfig& cfg) {
    std::vector<std::string> problems = validate(cfg, cfg.model.eps);
    for (double eps : cfg.experiment.eps_schedule) {
        for (auto& p : validate(cfg, eps)) problems.push_back(std::move(p));
    }
    return problems;
}

FieldState build_initial(const RunConfig& cfg, const Grid& grid, double eps) {
    FieldState s = FieldState::zeros(grid, 0.0);
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double x = grid.x(i);
        s.E[i] = cfg.E0.eval(x);
        s.u[i] = cfg.u0.eval(x);
        s.sigma[i] = cfg.sigma0.eval(x);
    }
    if (cfg.sigma0.type == Profile::Type::DeltaNet) {
        DeltaNet net = cfg.delta_net;
        net.mass = cfg.model.q;
        s.sigma = sample(net, eps, grid);
    }
    if (cfg.perturbation != 0.0) {
        std::mt19937_64 rng(cfg.seed);
        std::uniform_real_distribution<double> noise(-cfg.perturbation, cfg.perturbation);
        // perturb only away from the boundary so the margin check still applies
        const std::size_t edge = static_cast<std::size_t>(std::ceil(0.05 * static_cast<double>(grid.n)));
        for (auto* v : {&s.E, &s.u, &s.sigma}) {
            for (std::size_t i = edge; i + edge < grid.n; ++i) (*v)[i] += noise(rng);
        }
    }
    return s;
}

SpacetimeSolution run_single(const RunConfig& cfg, double eps) {
    const auto problems = validate(cfg, eps);
    if (!problems.empty()) throw ConfigError(problems);
    const Grid g = grid_for(cfg, eps);
    const Mollifier m = Mollifier::make(cfg.mollifier.kind, cfg.mollifier.support);
    const RegDerivOperator op(m, cfg.scaling(eps), g);
    ModelParams params = cfg.model;
    params.eps = eps;
    SpacetimeSolution sol = solve(build_initial(cfg, g, eps), cfg.solver, op, params);
    sol.meta.scaling = cfg.scaling;
    return sol;
}

std::string run_id(std::string_view text) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

}  // namespace regfield
