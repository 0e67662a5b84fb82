#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cvp/exhaustion.hpp"
#include "cvp/kernels.hpp"
#include "cvp/solver.hpp"
#include "cvp/space.hpp"

namespace cvp::cli {

using nlohmann::json;

/// Config problem with the dotted path of the offending field (or a line
/// number for parse errors).
class ConfigError : public Error {
public:
    ConfigError(std::string where, const std::string& what)
        : Error(ErrorKind::config_error, where.empty() ? what : where + ": " + what), where_(std::move(where)) {}
    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

struct SpaceConfig {
    Realization realization = Realization::euclidean;
    int dims_per_level = 1;
    int max_level = 1;
    std::uint64_t seed = 0;
    int spin_dimension = 1;  // operator realization only
    int hilbert_trunc = 0;
};

struct FamilyConfig {
    std::vector<Point> sample;
    std::vector<double> radii;
    int union_depth = 0;
    std::size_t max_members = default_family_cap;
    int tail_window = 2;
};

struct ChecksConfig {
    // Absent entries are disabled.
    std::optional<double> euler_lagrange_tol;
    bool phi_properties = false;
    std::optional<double> condition_b_eps;
    TestSet condition_b_set;
    bool condition_iv = false;
    std::optional<int> minimality_trials;
    struct Closure {
        int s = 1;
        int n = 8;
        int trials = 100;
    };
    std::optional<Closure> closure;
    struct Dimension {
        std::vector<double> radii;
        bool from_support = true;  // else the top-level candidate grid
    };
    std::optional<Dimension> dimension;
    std::optional<double> nontriviality_floor;
    std::optional<int> kernel_class_sample;
    std::vector<OpenRegion> mu_regions;
};

struct OutputConfig {
    std::filesystem::path dir = "out";
    bool json = true;
    bool csv = true;
};

struct ExperimentConfig {
    SpaceConfig space;
    std::optional<LagrangianKernel> kernel;
    std::vector<std::vector<Point>> grids;  // index k-1 holds the level-k candidate grid
    FamilyConfig family;
    SolverConfig solver;                    // template; level and grid are filled per level
    ChecksConfig checks;
    OutputConfig output;
    json source;                            // document after overrides

    std::vector<SolverConfig> level_configs() const;
    const LagrangianKernel& lagrangian() const { return *kernel; }
};

/// Parses JSON text; parse errors carry the line number.
json parse_json_text(const std::string& text, const std::string& origin);
json load_json_file(const std::filesystem::path& path);

/// Applies `dotted.path=value` overrides. The value is read as JSON when it
/// parses, else as a string.
void apply_overrides(json& doc, const std::vector<std::string>& overrides);

ExperimentConfig parse_config(const json& doc);
ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

// Building blocks shared with the JSON readers of serialized results.
Point parse_point(const json& j, int level, const SpaceConfig& space, const std::string& where);
TestSet parse_test_set(const json& j, const SpaceConfig& space, const std::string& where);
OpenRegion parse_open_region(const json& j, const SpaceConfig& space, const std::string& where);

}  // namespace cvp::cli
