#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "vrmhd/complex.hpp"
#include "vrmhd/integrators.hpp"
#include "vrmhd/stabilization.hpp"

namespace vrmhd {

enum class CaseName { CurrentSheet1D, Dispersion1D, OrszagTangIdeal, OrszagTangVR, KelvinHelmholtz, CurrentSheet2D };

const char* to_string(CaseName c);
CaseName parse_case_name(const std::string& s);
const std::vector<CaseName>& all_cases();

/// Geometry, physics, time stepping and perturbation parameters of a run.
struct CaseSpec {
    CaseName name = CaseName::OrszagTangIdeal;
    std::string preset = "published";  // "published" or "desk"
    std::array<AxisParams, 3> axes;
    double gamma = 5.0 / 3.0;
    DissipationSpec mu;
    DissipationSpec eta;
    double dt = 1e-3;
    double t_end = 1.0;

    // background state
    double rho0 = 1.0;
    double s0 = 0.0;
    std::array<double, 3> B0{0.0, 0.0, 0.0};

    // perturbations
    double amplitude = 0.0;
    std::uint64_t seed = 12345;
    int n_modes = 0;
    std::vector<double> phases;  // one per mode; missing entries are 0
    double width = 0.0;          // shear layer / sheet thickness

    // current sheet in 1D
    double By0 = 0.0;
    double t0 = 0.0;

    bool linearized_resistivity = false;
    Propagators enabled;

    /// Number of time steps covering t_end.
    long steps() const;
};

/// Parameters as published.
CaseSpec published_case(CaseName c);
/// Reduced resolution and horizon for workstation runs.
CaseSpec desk_case(CaseName c);
/// Published parameter sets of every case.
std::vector<CaseSpec> case_table();

ComplexParams complex_params(const CaseSpec& spec);

/// Initial state obtained through the commuting projectors.
State init_case(const DeRhamComplex& cx, const CaseSpec& spec);

/// B_y(x, t) = -B_y0 erf(x / (2 sqrt(eta (t + t0)))).
double reference_erf(double x, double t, double eta, double t0, double By0);

} // namespace vrmhd
