#include "regfield/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace regfield::io {

std::string format_double(double v) {
    if (v == 0.0) return "0";  // also folds -0
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    if (res.ec != std::errc{}) throw std::runtime_error("io: cannot format value");
    return std::string(buf, res.ptr);
}

std::string csv_field(std::string_view text) {
    if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("io: cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << csv_field(header[i]);
    out << "\r\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
        out << "\r\n";
    }
}

void write_state_csv(const std::filesystem::path& path, const FieldState& state, const Grid& grid) {
    std::vector<std::vector<double>> rows;
    rows.reserve(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) rows.push_back({grid.x(i), state.E[i], state.u[i], state.sigma[i]});
    write_csv(path, {"x", "E", "u", "sigma"}, rows);
}

std::string solution_metadata_json(const SpacetimeSolution& sol, std::string_view run_id) {
    using nlohmann::json;
    const RunMeta& m = sol.meta;
    json j;
    j["run_id"] = std::string(run_id);
    j["grid"] = {{"x_min", sol.grid.x_min}, {"x_max", sol.grid.x_max}, {"n", sol.grid.n}, {"dx", sol.grid.dx()}};
    j["params"] = {{"B0", m.params.B0},
                   {"T", m.params.T},
                   {"eps", m.params.eps},
                   {"q", m.params.q},
                   {"velocity_coupling", m.params.velocity_coupling}};
    j["mollifier"] = {{"kind", std::string(to_string(m.mollifier_kind))},
                      {"s_lo", m.mollifier_support.lo},
                      {"s_hi", m.mollifier_support.hi}};
    j["scaling"] = {{"kind", std::string(to_string(m.scaling.kind))},
                    {"c", m.scaling.c},
                    {"exponent", m.scaling.exponent}};
    j["nu"] = m.nu;
    j["solver"] = {{"id", m.solver},
                   {"dt", m.dt},
                   {"save_every", m.save_every},
                   {"guard_factor", m.guard_factor},
                   {"a_priori_bound", m.a_priori_bound}};
    j["status"] = std::string(to_string(m.status));
    j["message"] = m.message;
    json picard = json::array();
    for (const auto& p : m.picard) {
        picard.push_back({{"t_start", p.t_start}, {"t_end", p.t_end}, {"iterations", p.iterations},
                          {"final_update", p.final_update}});
    }
    j["picard"] = picard;
    json files = json::array();
    for (std::size_t k = 0; k < sol.states.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "state_%05zu.csv", k);
        files.push_back({{"file", name}, {"t", sol.times[k]}});
    }
    j["states"] = files;
    return j.dump(2);
}

void write_solution(const std::filesystem::path& dir, const SpacetimeSolution& sol, std::string_view run_id) {
    std::filesystem::create_directories(dir);
    for (std::size_t k = 0; k < sol.states.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "state_%05zu.csv", k);
        write_state_csv(dir / name, sol.states[k], sol.grid);
    }
    std::ofstream meta(dir / "solution.json", std::ios::binary);
    if (!meta) throw std::runtime_error("io: cannot write " + (dir / "solution.json").string());
    meta << solution_metadata_json(sol, run_id) << "\n";
}

}  // namespace regfield::io
