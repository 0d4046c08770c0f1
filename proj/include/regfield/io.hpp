#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "regfield/fields.hpp"

namespace regfield::io {

/// Shortest text with 17 significant digits, '.' decimal separator.
std::string format_double(double v);

/// RFC 4180 field quoting (quotes only when needed).
std::string csv_field(std::string_view text);

/// Writes rows of numbers under a header; numbers use format_double.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// Columns x, E, u, sigma.
void write_state_csv(const std::filesystem::path& path, const FieldState& state, const Grid& grid);

/// the run metadata and run id.
/// grid, parameters, mollifier, scaling, solver and run id.
void write_solution(const std::filesystem::path& dir, const SpacetimeSolution& sol, std::string_view run_id);

/// Metadata sidecar as a JSON string with sorted keys.
std::string solution_metadata_json(const SpacetimeSolution& sol, std::string_view run_id);

}  // namespace regfield::io
