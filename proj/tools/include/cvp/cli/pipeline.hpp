#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cvp/cli/config.hpp"
#include "cvp/diagnostics.hpp"
#include "cvp/exhaustion.hpp"

namespace cvp::cli {

enum ExitCode : int { exit_ok = 0, exit_error = 1, exit_check_failed = 2 };

struct RunOutcome {
    int exit_code = exit_ok;
    json report;
    std::vector<LevelOutcome> levels;
    std::optional<Construction> construction;
    std::optional<DimensionReport> dimension;
};

/// Solves every level, assembles the construction and runs the enabled checks.
/// Check failures set exit_check_failed; nothing is written.
RunOutcome run_pipeline(const ExperimentConfig& cfg);

/// report.json, phi_table.csv, atoms_level_k.csv, convergence.csv, dimension.csv
/// according to output.formats. Single-threaded, fixed order.
void write_run_outputs(const ExperimentConfig& cfg, const RunOutcome& out);

// CSV tables. Numbers use the shortest round-trip representation.
std::string format_number(double v);
std::string atoms_csv(const DiscreteMeasure& m);
std::string phi_table_csv(const Construction& c);
std::string convergence_csv(const Construction& c);
std::string dimension_csv(const DimensionReport* r);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace cvp::cli
