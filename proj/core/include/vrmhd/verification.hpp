#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "vrmhd/cases.hpp"
#include "vrmhd/diagnostics.hpp"
#include "vrmhd/runner.hpp"

namespace vrmhd {

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct InvariantTolerances {
    double mass = 1e-12;     // relative drift
    double divB = 1e-12;     // L2 norm
    double energy = 1e-7;    // relative drift
    double entropy = 1e-12;  // relative drift, ideal runs only
};

/// Drift of the conserved quantities over a diagnostics history.
std::vector<CheckResult> check_invariants(const std::vector<DiagnosticsRecord>& h, bool ideal,
                                          const InvariantTolerances& tol = {});

/// Entropy never decreases by more than rel_tol |S| between records.
CheckResult check_entropy_monotone(const std::vector<DiagnosticsRecord>& h, double rel_tol = 1e-12);

/// Crank-Nicolson finite differences for B_t = eta B_xx with erf initial
/// data and fixed end values; returns B at the requested points and time.
std::vector<double> heat_oracle(const std::vector<double>& x, double lo, double hi, double t_end, double eta,
                                double t0, double By0, int points = 4001, double dt = 0.02);

/// Max |B_y - erf reference| / B_y0 over |x| <= 4 sqrt(eta (t + t0)).
CheckResult check_current_sheet(const DeRhamComplex& cx, const CaseSpec& spec, const State& st);
CheckResult check_heat_oracle(const CaseSpec& spec, double t);

/// Width, in cells, of the steepest density ramp (10%-90% rise) along x.
double shock_width_cells(const DeRhamComplex& cx, const State& st, int samples_per_cell = 8);

/// Relative ridge error of each branch over the lowest n_modes modes.
std::vector<CheckResult> check_dispersion(const std::filesystem::path& dir, const CaseSpec& spec, int n_modes = 5,
                                          double rel_tol = 0.05);

/// Log-linear growth of the first n mode energies in [t0, t1].
std::vector<CheckResult> check_growth(const std::filesystem::path& modes_csv, int n_modes, double t0, double t1,
                                      double min_r2 = 0.98);

/// Desk configuration used by verify for a case, with its diagnostics outputs on.
RunConfig verification_config(CaseName c, const std::filesystem::path& dir);

/// Runs the desk preset of a case and evaluates every check that applies.
std::vector<CheckResult> verify_case(CaseName c, const std::filesystem::path& dir, std::ostream* log = nullptr);

std::string format_check(const CheckResult& r);

} // namespace vrmhd
