#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "vrmhd/config.hpp"
#include "vrmhd/diagnostics.hpp"
#include "vrmhd/integrators.hpp"

namespace vrmhd {

const char* version_string();

struct RunResult {
    long first_step = 0;
    long last_step = 0;
    State final_state;
    std::vector<DiagnosticsRecord> history;
    StepTimings timings;
    double wall_seconds = 0.0;
};

/// Called after every completed step (and once for the initial state).
using StepObserver = std::function<void(long step, const State& st, const Integrator& integ)>;

/// Builds the discretization, initializes or restarts, advances to t_end and
/// writes every output into cfg.output.dir. Solver failures are rethrown
/// after the last valid state has been flushed to last_valid.bin.
RunResult run(const RunConfig& cfg, std::ostream* log = nullptr, const StepObserver& observer = {});

/// Reads diagnostics.csv.
std::vector<DiagnosticsRecord> read_diagnostics(const std::filesystem::path& csv);

/// Numeric CSV with one header row; returns the header and the rows.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};
CsvTable read_csv(const std::filesystem::path& path);

} // namespace vrmhd
