#include "vrmhd/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <fftw3.h>

#include "vrmhd/errors.hpp"

namespace vrmhd {

using Eigen::MatrixXd;
using Eigen::VectorXd;

DiagnosticsRecord record(const Galerkin& gk, const Eos& eos, const State& st, long step) {
    const DeRhamComplex& cx = gk.complex();
    const VectorXd& W = gk.weights();
    DiagnosticsRecord r;
    r.step = step;
    r.time = st.time;
    const VectorXd rho = gk.eval_quad(SpaceTag::V3, st.rho.coeffs, 0);
    const VectorXd s = gk.eval_quad(SpaceTag::V3, st.s.coeffs, 0);
    r.mass = rho.dot(W);
    r.entropy = s.dot(W);
    r.e_kin = 0.5 * st.u.coeffs.dot(gk.weighted_apply(SpaceTag::X, rho, st.u.coeffs));
    double e_int = 0.0;
    for (int i = 0; i < rho.size(); ++i) e_int += W[i] * eos.rho_e(rho[i], s[i]);
    r.e_int = e_int;
    r.e_mag = 0.5 * st.B.coeffs.dot(gk.mass_apply(SpaceTag::V2, st.B.coeffs));
    r.e_total = r.e_kin + r.e_int + r.e_mag;
    const VectorXd d = cx.D() * st.B.coeffs;
    r.divB_l2 = std::sqrt(std::max(0.0, d.dot(gk.mass_apply(SpaceTag::V3, d))));
    return r;
}

const std::vector<std::string>& diagnostics_columns() {
    static const std::vector<std::string> cols{"step",  "time",  "mass",    "entropy", "e_kin",
                                               "e_int", "e_mag", "e_total", "divB_l2"};
    return cols;
}

std::string csv_header() {
    std::string h;
    for (const auto& c : diagnostics_columns()) h += (h.empty() ? "" : ",") + c;
    return h;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_row(const DiagnosticsRecord& r) {
    std::string s = std::to_string(r.step);
    for (double v : {r.time, r.mass, r.entropy, r.e_kin, r.e_int, r.e_mag, r.e_total, r.divB_l2})
        s += "," + format_double(v);
    return s;
}

std::vector<double> uniform_points(const Interval& iv, int n, bool periodic) {
    if (n < 1) throw ConfigError("need at least one sample point");
    std::vector<double> x(n);
    if (n == 1) {
        x[0] = 0.5 * (iv.lo + iv.hi);
        return x;
    }
    const double h = iv.length() / (periodic ? n : n - 1);
    for (int i = 0; i < n; ++i) x[i] = iv.lo + i * h;
    if (!periodic) x[n - 1] = iv.hi;
    return x;
}

Eigen::VectorXd sample_component(const DeRhamComplex& cx, const Field& f, int comp,
                                 std::array<std::vector<double>, 3> pts, int deriv_axis) {
    const SpaceLayout& lay = cx.layout(f.tag);
    if (f.coeffs.size() != lay.dim) throw TypeError("field length does not match its space");
    if (comp < 0 || comp >= static_cast<int>(lay.blocks.size())) throw TypeError("no such field component");
    const Block& b = lay.blocks[comp];
    std::array<Op1D, 3> ops;
    for (int a = 0; a < 3; ++a) {
        const Axis& ax = cx.axis(a);
        if (pts[a].empty()) {
            if (ax.active) throw ConfigError("sample points missing on an active axis");
            pts[a] = {0.5 * (ax.high.domain().lo + ax.high.domain().hi)};
        }
        const int der = (a == deriv_axis) ? 1 : 0;
        ops[a] = Op1D::sparse(collocation_matrix(ax.space(b.factors[a]), pts[a], der));
    }
    return kron_apply({&ops[0], &ops[1], &ops[2]}, f.coeffs.segment(b.offset, b.size()), b.shape);
}

namespace {

void check_uniform(const std::vector<double>& v, const char* what) {
    if (v.size() < 2) throw ConfigError(std::string(what) + ": need at least two samples");
    const double h = v[1] - v[0];
    if (!(h > 0.0)) throw ConfigError(std::string(what) + ": samples must increase");
    for (size_t i = 1; i < v.size(); ++i)
        if (std::abs((v[i] - v[i - 1]) - h) > 1e-9 * std::max(1.0, std::abs(h)) * v.size())
            throw ConfigError(std::string(what) + ": sampling is not uniform");
}

} // namespace

Spectrum spacetime_spectrum(const std::vector<double>& x, const std::vector<double>& t, const Eigen::MatrixXd& samples) {
    check_uniform(x, "space axis");
    check_uniform(t, "time axis");
    const int nt = static_cast<int>(t.size()), nx = static_cast<int>(x.size());
    if (samples.rows() != nt || samples.cols() != nx) throw ConfigError("sample matrix does not match the axes");
    const double dx = x[1] - x[0], dt = t[1] - t[0];

    std::vector<std::complex<double>> buf(static_cast<size_t>(nt) * nx);
    for (int i = 0; i < nt; ++i)
        for (int j = 0; j < nx; ++j) buf[static_cast<size_t>(i) * nx + j] = samples(i, j);
    auto* data = reinterpret_cast<fftw_complex*>(buf.data());
    fftw_plan plan = fftw_plan_dft_2d(nt, nx, data, data, FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);

    // forward in t picks exp(+i 2 pi m n / nt) content at bin -m, i.e. omega = -2 pi f_m
    Spectrum sp;
    const int nk = nx / 2 + 1;
    sp.k.resize(nk);
    for (int j = 0; j < nk; ++j) sp.k[j] = 2.0 * M_PI * j / (nx * dx);
    std::vector<std::pair<double, int>> om(nt);
    for (int m = 0; m < nt; ++m) {
        const int fm = m <= nt / 2 ? m : m - nt;
        om[m] = {-2.0 * M_PI * fm / (nt * dt), m};
    }
    std::sort(om.begin(), om.end());
    sp.omega.resize(nt);
    sp.power.resize(nt, nk);
    const double norm = 1.0 / (double(nt) * nx);
    for (int r = 0; r < nt; ++r) {
        sp.omega[r] = om[r].first;
        for (int j = 0; j < nk; ++j) sp.power(r, j) = std::norm(buf[static_cast<size_t>(om[r].second) * nx + j] * norm);
    }
    return sp;
}

DispersionBranches dispersion_branches(double k, double rho0, double p0, double gamma, const std::array<double, 3>& B) {
    if (!(rho0 > 0.0)) throw StateError("dispersion relation needs a positive density");
    const double bx2 = B[0] * B[0], bp2 = B[0] * B[0] + B[1] * B[1] + B[2] * B[2];
    if (!(bp2 > 0.0)) throw ConfigError("dispersion relation needs a nonzero field");
    const double va2 = bp2 / rho0;
    const double cs2 = gamma * p0 / rho0;
    const double delta = 4.0 * bx2 * cs2 * va2 / ((cs2 + va2) * (cs2 + va2) * bp2);
    const double sq = std::sqrt(std::max(0.0, 1.0 - delta));
    DispersionBranches b;
    b.shear = std::abs(k) * std::sqrt(va2 * bx2 / bp2);
    b.fast = std::abs(k) * std::sqrt(0.5 * (cs2 + va2) * (1.0 + sq));
    b.slow = std::abs(k) * std::sqrt(std::max(0.0, 0.5 * (cs2 + va2) * (1.0 - sq)));
    return b;
}

std::vector<double> pencil_frequencies(const std::vector<Eigen::VectorXcd>& channels, double dt, int n_poles) {
    if (channels.empty()) throw ConfigError("no channels");
    const int n = static_cast<int>(channels[0].size());
    const int L = n / 2;
    if (n_poles < 1 || n_poles > L) throw ConfigError("invalid pole count");
    const int rows = n - L;
    Eigen::MatrixXcd Y(rows * channels.size(), L + 1);
    for (size_t c = 0; c < channels.size(); ++c) {
        if (channels[c].size() != n) throw ConfigError("channels differ in length");
        for (int r = 0; r < rows; ++r)
            for (int j = 0; j <= L; ++j) Y(c * rows + r, j) = channels[c][r + j];
    }
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(Y, Eigen::ComputeThinV);
    const Eigen::MatrixXcd V = svd.matrixV().leftCols(n_poles).conjugate();
    const Eigen::MatrixXcd V1 = V.topRows(L), V2 = V.bottomRows(L);
    const Eigen::MatrixXcd M = V1.completeOrthogonalDecomposition().solve(V2);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(M);
    std::vector<double> om;
    for (int i = 0; i < n_poles; ++i) om.push_back(-std::arg(es.eigenvalues()[i]) / dt);
    std::sort(om.begin(), om.end());
    return om;
}

Eigen::VectorXcd fourier_coefficient(const Eigen::MatrixXd& samples, const std::vector<double>& x, double k) {
    Eigen::VectorXcd e(x.size());
    for (size_t j = 0; j < x.size(); ++j) e[j] = std::polar(1.0 / x.size(), -k * x[j]);
    return samples.cast<std::complex<double>>() * e;
}

std::vector<Ridge> dispersion_ridges(const std::vector<double>& x, const std::vector<double>& t, double length,
                                     const Eigen::MatrixXd& ux, const Eigen::MatrixXd& uy, const Eigen::MatrixXd& uz,
                                     int n_modes) {
    check_uniform(t, "time axis");
    const double dt = t[1] - t[0];
    std::vector<Ridge> out;
    for (int m = 1; m <= n_modes; ++m) {
        Ridge r;
        r.mode = m;
        r.k = 2.0 * M_PI * m / length;
        const auto shear = pencil_frequencies({fourier_coefficient(uz, x, r.k)}, dt, 2);
        r.measured.shear = 0.5 * (std::abs(shear[0]) + std::abs(shear[1]));
        const auto ms = pencil_frequencies({fourier_coefficient(ux, x, r.k), fourier_coefficient(uy, x, r.k)}, dt, 4);
        std::vector<double> a;
        for (double w : ms) a.push_back(std::abs(w));
        std::sort(a.begin(), a.end());
        r.measured.slow = 0.5 * (a[0] + a[1]);
        r.measured.fast = 0.5 * (a[2] + a[3]);
        out.push_back(r);
    }
    return out;
}

std::vector<double> mode_energies(const DeRhamComplex& cx, const Field& B, const std::vector<int>& modes, int samples_x) {
    if (B.tag != SpaceTag::V2) throw TypeError("mode energies need a V2 field");
    const Axis& ax = cx.axis(0);
    if (!ax.active || ax.high.boundary() != Boundary::Periodic) throw ConfigError("mode energies need a periodic x axis");
    const int nx = samples_x > 0 ? samples_x : 4 * ax.high.n_cells();
    const double lx = ax.high.domain().length();
    for (int m : modes)
        if (m < 0 || m > nx / 2) throw ConfigError("mode outside the sampled range");
    const std::vector<double> xs = uniform_points(ax.high.domain(), nx, true);

    // tensor of transverse quadrature weights
    const std::vector<double>& wy = cx.axis(1).quad_weights;
    const std::vector<double>& wz = cx.axis(2).quad_weights;
    const SpaceLayout& lay = cx.layout(SpaceTag::V2);
    std::vector<double> energy(modes.size(), 0.0);
    std::vector<double> row(nx);
    std::vector<std::complex<double>> spec(nx / 2 + 1);
    fftw_plan plan = fftw_plan_dft_r2c_1d(nx, row.data(), reinterpret_cast<fftw_complex*>(spec.data()), FFTW_ESTIMATE);
    for (int c = 0; c < 3; ++c) {
        const Block& b = lay.blocks[c];
        std::array<Op1D, 3> ops;
        ops[0] = Op1D::sparse(collocation_matrix(ax.space(b.factors[0]), xs, 0));
        for (int a = 1; a < 3; ++a) ops[a] = cx.axis(a).eval[static_cast<int>(NodeSet::Quad)][static_cast<int>(b.factors[a])][0];
        const VectorXd vals = kron_apply({&ops[0], &ops[1], &ops[2]}, B.coeffs.segment(b.offset, b.size()), b.shape);
        const int ny = static_cast<int>(wy.size()), nz = static_cast<int>(wz.size());
        for (int kz = 0; kz < nz; ++kz)
            for (int ky = 0; ky < ny; ++ky) {
                const double w = wy[ky] * wz[kz];
                std::copy_n(vals.data() + static_cast<size_t>(kz * ny + ky) * nx, nx, row.begin());
                fftw_execute(plan);
                for (size_t i = 0; i < modes.size(); ++i) {
                    const int m = modes[i];
                    const double a2 = std::norm(spec[m] / double(nx));
                    const bool self_conjugate = m == 0 || 2 * m == nx;
                    energy[i] += w * lx * a2 * (self_conjugate ? 0.5 : 1.0);
                }
            }
    }
    fftw_destroy_plan(plan);
    return energy;
}

GrowthFit fit_growth(const std::vector<double>& t, const std::vector<double>& energy, double t0, double t1) {
    if (t.size() != energy.size()) throw ConfigError("time and energy series differ in length");
    std::vector<double> xs, ys;
    for (size_t i = 0; i < t.size(); ++i)
        if (t[i] >= t0 && t[i] <= t1) {
            if (!(energy[i] > 0.0)) throw StateError("nonpositive energy in the fit window");
            xs.push_back(t[i]);
            ys.push_back(std::log(energy[i]));
        }
    GrowthFit f;
    f.points = static_cast<int>(xs.size());
    if (f.points < 3) throw ConfigError("fit window holds fewer than three samples");
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    const double slope = sxy / sxx;
    f.rate = 0.5 * slope;
    f.intercept = my - slope * mx;
    f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    return f;
}

} // namespace vrmhd
