#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "vrmhd/cases.hpp"
#include "vrmhd/integrators.hpp"

namespace vrmhd {

struct OutputOptions {
    std::filesystem::path dir = "output";
    int diagnostics_every = 1;
    int snapshot_every = 0;  // 0: final snapshot only
    int trace_every = 0;     // velocity line samples, 0: off
    int trace_samples = 0;   // points per line, 0: 4 per cell
    int modes_every = 0;     // magnetic mode energies, 0: off
    int modes_count = 6;
};

struct SolverOptions {
    double picard_tol = 1e-10;
    int picard_max_iters = 50;
    double linear_tol = 1e-12;
    Composition composition = Composition::Symmetric;
};

struct RunConfig {
    CaseSpec spec;
    OutputOptions output;
    SolverOptions solver;
    std::optional<std::filesystem::path> restart;
    std::optional<long> max_steps;  // stop early, e.g. to split a run
    double growth_t0 = 15.0;        // growth-rate window for mode energies
    double growth_t1 = 30.0;
};

/// Parses a YAML run description; throws ConfigError with the offending key.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// YAML rendering that parse_config reads back to the same configuration.
std::string dump_config(const RunConfig& cfg);

StepConfig step_config(const RunConfig& cfg);

} // namespace vrmhd
