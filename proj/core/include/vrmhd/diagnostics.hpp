#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vrmhd/complex.hpp"
#include "vrmhd/eos.hpp"
#include "vrmhd/galerkin.hpp"
#include "vrmhd/integrators.hpp"

namespace vrmhd {

struct DiagnosticsRecord {
    long step = 0;
    double time = 0.0;
    double mass = 0.0;
    double entropy = 0.0;
    double e_kin = 0.0;
    double e_int = 0.0;
    double e_mag = 0.0;
    double e_total = 0.0;
    double divB_l2 = 0.0;
};

DiagnosticsRecord record(const Galerkin& gk, const Eos& eos, const State& st, long step = 0);

/// Column names of diagnostics.csv, in order.
const std::vector<std::string>& diagnostics_columns();
std::string csv_header();
std::string csv_row(const DiagnosticsRecord& r);
/// Shortest round-trip representation with 17 significant digits.
std::string format_double(double v);

/// n uniformly spaced points; the right end point is dropped on periodic axes.
std::vector<double> uniform_points(const Interval& iv, int n, bool periodic);

/// Samples component `comp` of a field on the tensor grid pts[0] x pts[1] x pts[2]
/// (x fastest). Inactive axes take their single midpoint when pts[a] is empty.
Eigen::VectorXd sample_component(const DeRhamComplex& cx, const Field& f, int comp,
                                 std::array<std::vector<double>, 3> pts, int deriv_axis = -1);

struct Spectrum {
    std::vector<double> k;      // nonnegative wavenumbers
    std::vector<double> omega;  // ascending angular frequencies
    Eigen::MatrixXd power;      // omega x k
};

/// Power of samples(t, x) decomposed on exp(i(k x - omega t)).
/// Throws ConfigError on non-uniform sampling.
Spectrum spacetime_spectrum(const std::vector<double>& x, const std::vector<double>& t,
                            const Eigen::MatrixXd& samples);

struct DispersionBranches {
    double shear = 0.0;
    double slow = 0.0;
    double fast = 0.0;
};

/// Roots omega >= 0 of the linear ideal MHD dispersion relation for a wave
/// vector along x in a uniform state.
DispersionBranches dispersion_branches(double k, double rho0, double p0, double gamma,
                                       const std::array<double, 3>& B);

/// Frequencies omega of the poles exp(-i omega t) shared by the channels,
/// estimated with the matrix pencil method.
std::vector<double> pencil_frequencies(const std::vector<Eigen::VectorXcd>& channels, double dt, int n_poles);

/// Spatial Fourier coefficient (1/N) sum_j f(x_j) exp(-i k x_j) of each row.
Eigen::VectorXcd fourier_coefficient(const Eigen::MatrixXd& samples, const std::vector<double>& x, double k);

struct Ridge {
    int mode = 0;
    double k = 0.0;
    DispersionBranches measured;
};

/// Ridge frequencies of the lowest modes of a 1D periodic velocity trace:
/// shear from u_z, slow and fast from (u_x, u_y). Traces are time x space.
std::vector<Ridge> dispersion_ridges(const std::vector<double>& x, const std::vector<double>& t, double length,
                                     const Eigen::MatrixXd& ux, const Eigen::MatrixXd& uy, const Eigen::MatrixXd& uz,
                                     int n_modes);

/// Magnetic energy carried by the x-Fourier modes exp(2 pi i n x / L_x).
/// The transverse directions are integrated with the mass quadrature.
std::vector<double> mode_energies(const DeRhamComplex& cx, const Field& B, const std::vector<int>& modes,
                                  int samples_x = 0);

struct GrowthFit {
    double rate = 0.0;       // gamma in E ~ exp(2 gamma t)
    double intercept = 0.0;  // of log E
    double r2 = 0.0;
    int points = 0;
};

/// Least-squares fit of log E over t in [t0, t1].
GrowthFit fit_growth(const std::vector<double>& t, const std::vector<double>& energy, double t0, double t1);

} // namespace vrmhd
