#pragma once

#include "hypofbi/hypofbi.hpp"

#include "json.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace hypofbi::app {

using json = nlohmann::json;

/// Malformed or out-of-range configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parsed job file plus the directory relative paths resolve against.
struct Job {
    json cfg;
    std::filesystem::path base_dir;
};

Job load_job(const std::filesystem::path& path);
Job job_from_string(const std::string& text, const std::filesystem::path& base_dir = ".");

Chart chart_from_json(const json& j, const std::filesystem::path& base_dir);
Chart job_chart(const Job& job);
Cutoff cutoff_from_json(const json& j, const Chart& chart);
TestSolution solution_from_json(const json& j, const Chart& chart, const Cutoff& chi);
/// {"nodes": k, "panels": p} or {"nodes": k, "xi_max": X}; default xi_max is `fallback_xi_max`.
QuadratureGrid grid_from_json(const json& j, const Cutoff& chi, double fallback_xi_max);
std::vector<double> magnitudes_from_json(const json& j);
FitOptions fit_options_from_json(const json& j);
std::vector<std::vector<double>> points_from_json(const json& j, int dim, const char* what);
std::vector<std::vector<double>> directions_from_json(const json& j, int m);

/// Required member lookup with a readable error.
const json& require(const json& j, const char* key);

} // namespace hypofbi::app
