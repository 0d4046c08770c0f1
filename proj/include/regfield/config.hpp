#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "regfield/analysis.hpp"
#include "regfield/deltanet.hpp"
#include "regfield/fields.hpp"
#include "regfield/mollifier.hpp"
#include "regfield/scaling.hpp"
#include "regfield/solver.hpp"

namespace regfield {

/// Malformed config or violated preconditions; carries every problem found.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

/// Initial profile for one field.
struct Profile {
    enum class Type { Zero, Constant, Gaussian, DeltaNet };
    Type type = Type::Zero;
    double value = 0.0;      // Constant
    double amplitude = 0.0;  // Gaussian: amplitude * exp(-((x - center)/width)^2)
    double center = 0.0;
    double width = 1.0;

    double eval(double x) const;
};

struct MollifierSpec {
    MollifierKind kind = MollifierKind::SymmetricBump;
    Support support{};
};

struct ObservableSpec {
    std::string name;
    Field field = Field::Q;
    TestFunction2D psi{};
    /// "diagonal" selects the delta(t - x) pairing as target.
    std::optional<std::string> target_rule;
    std::optional<double> target_value;
};

struct TrajectoryStart {
    double t0 = 0.0;
    double x0 = 0.0;
};

/// Subcommand-specific settings.
struct ExperimentSpec {
    std::vector<double> eps_schedule;
    std::vector<ObservableSpec> observables;
    double probe_x0 = 0.0;
    ProbeSide probe_side = ProbeSide::Right;
    double probe_tolerance = 1e-8;
    double blowup_center = 0.0;
    double blowup_window = 0.5;
    std::vector<TrajectoryStart> starts;
    double r_end = 0.0;
    double dr = 0.01;
    std::vector<int> p_values{1, 2};
    std::vector<double> eps_grid;
    /// Refine the grid per eps so that nu and w(eps) span >= 4 cells.
    bool refine_grid = true;
};

struct RunConfig {
    Grid grid{};
    ModelParams model{};
    MollifierSpec mollifier{};
    ScalingFunction scaling{ScalingKind::Constant, 0.1, 1.0};
    DeltaNet delta_net{};
    Profile E0{}, u0{}, sigma0{};
    SolverConfig solver{};
    /// Amplitude of seeded uniform noise added to the initial data.
    double perturbation = 0.0;
    ExperimentSpec experiment{};
    int workers = 1;
    std::uint64_t seed = 0;
};

RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::filesystem::path& path);

/// Every violated precondition for a run at eps (empty when consistent).
std::vector<std::string> validate(const RunConfig& cfg, double eps);
/// validate() for the model eps and every eps of the experiment schedule.
std::vector<std::string> validate_all(const RunConfig& cfg);

/// Grid used at eps: the configured grid, refined when the experiment asks
/// for it and the kernel or delta net would be under-resolved.
Grid grid_for(const RunConfig& cfg, double eps);

FieldState build_initial(const RunConfig& cfg, const Grid& grid, double eps);

/// Full solve at eps with the configured solver.
SpacetimeSolution run_single(const RunConfig& cfg, double eps);

/// 64-bit FNV-1a of the text, as 16 hex digits.
std::string run_id(std::string_view text);

}  // namespace regfield
