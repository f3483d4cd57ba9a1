#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "support.hpp"
#include "vrmhd/cases.hpp"
#include "vrmhd/diagnostics.hpp"
#include "vrmhd/errors.hpp"

using namespace vrmhd;
using namespace vrmhd::test;

namespace {

State rest_state(const DeRhamComplex& cx) {
    State st;
    st.u = Field(SpaceTag::X, Eigen::VectorXd::Zero(cx.dim(SpaceTag::X)));
    st.rho = cx.project_scalar(SpaceTag::V3, [](const Vec3&) { return 1.0; });
    st.s = Field(SpaceTag::V3, Eigen::VectorXd::Zero(cx.dim(SpaceTag::V3)));
    st.B = Field(SpaceTag::V2, Eigen::VectorXd::Zero(cx.dim(SpaceTag::V2)));
    return st;
}

std::vector<double> grid(int n, double h) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = i * h;
    return v;
}

} // namespace

TEST(Diagnostics, RestStateOnUnitCube) {
    const DeRhamComplex cx = build_complex(params_3d(2, 4));
    const Galerkin gk(cx);
    const DiagnosticsRecord r = record(gk, Eos(5.0 / 3.0), rest_state(cx), 7);
    EXPECT_EQ(r.step, 7);
    EXPECT_NEAR(r.mass, 1.0, 1e-14);
    EXPECT_NEAR(r.e_int, 1.0, 1e-13);
    EXPECT_EQ(r.e_kin, 0.0);
    EXPECT_EQ(r.e_mag, 0.0);
    EXPECT_EQ(r.entropy, 0.0);
    EXPECT_EQ(r.divB_l2, 0.0);
    EXPECT_EQ(r.e_total, r.e_kin + r.e_int + r.e_mag);
}

TEST(Diagnostics, OrszagTangKineticEnergy) {
    CaseSpec spec = desk_case(CaseName::OrszagTangIdeal);
    const DeRhamComplex cx = build_complex(complex_params(spec));
    const Galerkin gk(cx);
    const DiagnosticsRecord r = record(gk, Eos(spec.gamma), init_case(cx, spec));
    const double g = spec.gamma;
    EXPECT_NEAR(r.e_kin, 2.0 * M_PI * M_PI * g * g, 1e-6 * r.e_kin);
    EXPECT_NEAR(r.e_kin, 54.83, 0.01);
    EXPECT_NEAR(r.mass, 4.0 * M_PI * M_PI * g * g, 1e-10 * r.mass);
    EXPECT_LE(r.divB_l2, 1e-12);
}

TEST(Diagnostics, CurlHasNoDivergence) {
    const DeRhamComplex cx = build_complex(params_3d(2, 5));
    const Galerkin gk(cx);
    std::mt19937_64 rng(3);
    State st = rest_state(cx);
    st.B = cx.curl(Field(SpaceTag::V1, random_vector(cx.dim(SpaceTag::V1), rng)));
    const DiagnosticsRecord r = record(gk, Eos(5.0 / 3.0), st);
    EXPECT_GT(r.e_mag, 0.0);
    EXPECT_LE(r.divB_l2, 1e-12);
    st.B.coeffs += random_vector(cx.dim(SpaceTag::V2), rng, 1e-3);
    EXPECT_GT(record(gk, Eos(5.0 / 3.0), st).divB_l2, 1e-6);
}

TEST(Diagnostics, CsvRowsRoundTrip) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (int i = 0; i < 200; ++i) {
        const double v = u(rng) * std::pow(10.0, static_cast<int>(u(rng)) % 20);
        EXPECT_EQ(std::stod(format_double(v)), v);
    }
    EXPECT_EQ(csv_header(), "step,time,mass,entropy,e_kin,e_int,e_mag,e_total,divB_l2");
    DiagnosticsRecord r;
    r.step = 3;
    r.time = 0.1;
    r.mass = 1.0 / 3.0;
    const std::string row = csv_row(r);
    EXPECT_EQ(row.substr(0, 2), "3,");
    EXPECT_NE(row.find("0.33333333333333331"), std::string::npos);
}

TEST(Diagnostics, UniformPoints) {
    const auto p = uniform_points({0.0, 1.0}, 4, true);
    EXPECT_EQ(p.size(), 4u);
    EXPECT_DOUBLE_EQ(p[3], 0.75);
    const auto c = uniform_points({0.0, 1.0}, 5, false);
    EXPECT_EQ(c.back(), 1.0);
    EXPECT_DOUBLE_EQ(c[1], 0.25);
    EXPECT_THROW(uniform_points({0.0, 1.0}, 0, true), ConfigError);
}

TEST(Diagnostics, SampleComponentOfProjectedField) {
    const DeRhamComplex cx = build_complex(params_2d(3, 16));
    const Field f = cx.project_scalar(SpaceTag::V0, [](const Vec3& x) { return std::sin(x[0]) * std::cos(x[1]); });
    const auto xs = uniform_points({0.0, 2.0 * M_PI}, 10, true);
    const auto v = sample_component(cx, f, 0, {xs, xs, {}});
    const auto dv = sample_component(cx, f, 0, {xs, xs, {}}, 0);
    for (int j = 0; j < 10; ++j)
        for (int i = 0; i < 10; ++i) {
            EXPECT_NEAR(v[j * 10 + i], std::sin(xs[i]) * std::cos(xs[j]), 1e-4);
            EXPECT_NEAR(dv[j * 10 + i], std::cos(xs[i]) * std::cos(xs[j]), 1e-3);
        }
    EXPECT_THROW(sample_component(cx, f, 0, {std::vector<double>{}, xs, std::vector<double>{}}), ConfigError);
    EXPECT_THROW(sample_component(cx, f, 1, {xs, xs, {}}), TypeError);
}

TEST(Diagnostics, SpectrumOfTravellingWavePeaksAtItsFrequency) {
    const int nx = 32, nt = 64;
    const double L = 2.0 * M_PI, dt = 0.1;
    const auto x = grid(nx, L / nx), t = grid(nt, dt);
    const int kb = 3, wb = 5;
    const double k0 = 2.0 * M_PI * kb / L, w0 = 2.0 * M_PI * wb / (nt * dt);
    Eigen::MatrixXd s(nt, nx);
    for (int i = 0; i < nt; ++i)
        for (int j = 0; j < nx; ++j) s(i, j) = std::cos(k0 * x[j] - w0 * t[i]);
    const Spectrum sp = spacetime_spectrum(x, t, s);
    ASSERT_EQ(sp.k.size(), static_cast<size_t>(nx / 2 + 1));
    ASSERT_EQ(sp.omega.size(), static_cast<size_t>(nt));
    EXPECT_TRUE(std::is_sorted(sp.omega.begin(), sp.omega.end()));
    Eigen::Index r, c;
    const double peak = sp.power.maxCoeff(&r, &c);
    EXPECT_NEAR(sp.k[c], k0, 1e-12);
    EXPECT_NEAR(sp.omega[r], w0, 1e-12);
    EXPECT_NEAR(peak, 0.25, 1e-12);
    EXPECT_NEAR(sp.power.sum(), 0.25, 1e-12);
}

TEST(Diagnostics, SpectrumOfWhiteNoiseIsFlat) {
    const int nx = 64, nt = 256;
    const auto x = grid(nx, 1.0), t = grid(nt, 1.0);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd s(nt, nx);
    for (int i = 0; i < nt; ++i)
        for (int j = 0; j < nx; ++j) s(i, j) = n(rng);
    const Spectrum sp = spacetime_spectrum(x, t, s);
    const Eigen::VectorXd col = sp.power.colwise().mean();
    const double mean = col.mean();
    for (int j = 0; j < col.size(); ++j) EXPECT_NEAR(col[j] / mean, 1.0, 0.3) << "k bin " << j;
}

TEST(Diagnostics, SpectrumRejectsNonUniformSampling) {
    auto x = grid(8, 1.0), t = grid(8, 1.0);
    const Eigen::MatrixXd s = Eigen::MatrixXd::Zero(8, 8);
    EXPECT_NO_THROW(spacetime_spectrum(x, t, s));
    t[5] += 0.1;
    EXPECT_THROW(spacetime_spectrum(x, t, s), ConfigError);
    EXPECT_THROW(spacetime_spectrum(x, grid(8, 1.0), Eigen::MatrixXd::Zero(8, 7)), ConfigError);
}

TEST(Diagnostics, DispersionBranchesOfDeskState) {
    const double g = 5.0 / 3.0;
    const DispersionBranches b = dispersion_branches(1.0, 1.0, 1.0, g, {1.0, 1.0, 0.0});
    const double cs2 = g, va2 = 2.0, delta = 60.0 / 121.0;
    EXPECT_NEAR(b.fast, std::sqrt(0.5 * (cs2 + va2) * (1.0 + std::sqrt(1.0 - delta))), 1e-14);
    EXPECT_NEAR(b.slow, std::sqrt(0.5 * (cs2 + va2) * (1.0 - std::sqrt(1.0 - delta))), 1e-14);
    EXPECT_NEAR(b.shear, 1.0, 1e-14);
}

TEST(Diagnostics, DispersionBranchesSolveTheQuartic) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.2, 3.0), s(-2.0, 2.0);
    for (int i = 0; i < 50; ++i) {
        const double k = u(rng), rho = u(rng), p = u(rng), g = 1.0 + 0.5 * u(rng);
        const std::array<double, 3> B{s(rng), s(rng), s(rng)};
        const DispersionBranches b = dispersion_branches(k, rho, p, g, B);
        const double cs2 = g * p / rho, va2 = (B[0] * B[0] + B[1] * B[1] + B[2] * B[2]) / rho, vax2 = B[0] * B[0] / rho;
        for (double w : {b.fast, b.slow}) {
            const double w2 = w * w, k2 = k * k;
            const double res = w2 * w2 - k2 * (cs2 + va2) * w2 + k2 * k2 * cs2 * vax2;
            EXPECT_NEAR(res, 0.0, 1e-11 * std::pow(k2 * (cs2 + va2), 2));
        }
        // Vieta
        EXPECT_NEAR(b.fast * b.fast + b.slow * b.slow, k * k * (cs2 + va2), 1e-12 * k * k * (cs2 + va2));
        EXPECT_NEAR(b.shear, k * std::sqrt(vax2), 1e-13);
        EXPECT_LE(b.slow, b.fast);
    }
}

TEST(Diagnostics, DispersionLimits) {
    const DispersionBranches perp = dispersion_branches(2.0, 1.0, 1.0, 5.0 / 3.0, {0.0, 1.5, 0.0});
    EXPECT_EQ(perp.shear, 0.0);
    EXPECT_NEAR(perp.slow, 0.0, 1e-14);
    EXPECT_NEAR(perp.fast, 2.0 * std::sqrt(5.0 / 3.0 + 2.25), 1e-13);
    const DispersionBranches cold = dispersion_branches(1.0, 2.0, 1e-14, 5.0 / 3.0, {1.0, 1.0, 0.0});
    EXPECT_NEAR(cold.fast, 1.0, 1e-12);
    EXPECT_NEAR(cold.slow, 0.0, 1e-6);
    EXPECT_THROW(dispersion_branches(1.0, 0.0, 1.0, 1.4, {1.0, 0.0, 0.0}), StateError);
    EXPECT_THROW(dispersion_branches(1.0, 1.0, 1.0, 1.4, {0.0, 0.0, 0.0}), ConfigError);
}

TEST(Diagnostics, PencilRecoversFrequencies) {
    const double dt = 0.05;
    const int n = 200;
    Eigen::VectorXcd a(n), b(n);
    for (int i = 0; i < n; ++i) {
        const double t = i * dt;
        a[i] = 0.7 * std::polar(1.0, -1.3 * t) + 0.2 * std::polar(1.0, 2.9 * t);
        b[i] = std::polar(0.4, -2.9 * t + 0.3) + std::polar(0.1, 1.3 * t);
    }
    const auto w = pencil_frequencies({a, b}, dt, 4);
    ASSERT_EQ(w.size(), 4u);
    EXPECT_NEAR(w[0], -2.9, 1e-8);
    EXPECT_NEAR(w[1], -1.3, 1e-8);
    EXPECT_NEAR(w[2], 1.3, 1e-8);
    EXPECT_NEAR(w[3], 2.9, 1e-8);
    EXPECT_THROW(pencil_frequencies({}, dt, 1), ConfigError);
    EXPECT_THROW(pencil_frequencies({a}, dt, n), ConfigError);
}

TEST(Diagnostics, FourierCoefficientOfSingleMode) {
    const int n = 16;
    const auto x = grid(n, 2.0 * M_PI / n);
    Eigen::MatrixXd s(1, n);
    for (int j = 0; j < n; ++j) s(0, j) = 3.0 * std::cos(2.0 * x[j]) + std::sin(5.0 * x[j]);
    EXPECT_NEAR(std::abs(fourier_coefficient(s, x, 2.0)[0] - std::complex<double>(1.5, 0.0)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(fourier_coefficient(s, x, 5.0)[0] - std::complex<double>(0.0, -0.5)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(fourier_coefficient(s, x, 3.0)[0]), 0.0, 1e-14);
}

TEST(Diagnostics, ModeEnergyOfSingleMode) {
    ComplexParams cp = params_2d(2, 32);
    const DeRhamComplex cx = build_complex(cp);
    const Field B = cx.project_vector(SpaceTag::V2, [](const Vec3& x) { return Vec3{0.0, 0.0, std::sin(3.0 * x[0])}; });
    std::vector<int> modes(65);
    for (int m = 0; m <= 64; ++m) modes[m] = m;
    const auto e = mode_energies(cx, B, modes);
    // 0.5 * integral of sin^2 over the square, up to the spline projection error
    const double want = 0.5 * 2.0 * M_PI * M_PI;
    EXPECT_NEAR(e[3], want, 1e-3 * want);
    // leakage only into the knot aliases 32 - 3 and 32 + 3
    for (int m = 0; m <= 64; ++m)
        if (m != 3) EXPECT_LE(e[m], (m == 29 || m == 35 ? 1e-5 : 1e-9) * want) << m;
}

TEST(Diagnostics, ModeEnergiesSumToMagneticEnergy) {
    const DeRhamComplex cx = build_complex(params_2d(2, 32));
    const Galerkin gk(cx);
    const Field B = cx.project_vector(SpaceTag::V2, [](const Vec3& x) {
        return Vec3{-std::sin(x[1]), std::sin(2.0 * x[0]),
                    1.0 + std::sin(x[0]) + 0.5 * std::cos(3.0 * x[0] + 0.4) * std::cos(x[1])};
    });
    const int nx = 1024;
    std::vector<int> modes(nx / 2 + 1);
    for (int m = 0; m <= nx / 2; ++m) modes[m] = m;
    const auto e = mode_energies(cx, B, modes, nx);
    double sum = 0.0;
    for (double v : e) sum += v;
    const double emag = 0.5 * B.coeffs.dot(gk.mass_apply(SpaceTag::V2, B.coeffs));
    EXPECT_NEAR(sum, emag, 1e-8 * emag);
}

TEST(Diagnostics, ModeEnergiesRejectBadInput) {
    const DeRhamComplex cx = build_complex(params_2d(1, 8));
    const Field B(SpaceTag::V2, Eigen::VectorXd::Zero(cx.dim(SpaceTag::V2)));
    EXPECT_THROW(mode_energies(cx, B, {17}), ConfigError);
    EXPECT_THROW(mode_energies(cx, Field(SpaceTag::V1, Eigen::VectorXd::Zero(cx.dim(SpaceTag::V1))), {1}), TypeError);
    const DeRhamComplex cl = build_complex([] {
        ComplexParams cp = params_2d(1, 8);
        cp.axes[0].boundary = Boundary::Clamped;
        return cp;
    }());
    EXPECT_THROW(mode_energies(cl, Field(SpaceTag::V2, Eigen::VectorXd::Zero(cl.dim(SpaceTag::V2))), {1}), ConfigError);
}

TEST(Diagnostics, GrowthFitOfSyntheticExponential) {
    std::vector<double> t, e;
    for (int i = 0; i <= 100; ++i) {
        t.push_back(0.1 * i);
        e.push_back(3e-12 * std::exp(2.0 * 0.137 * t.back()));
    }
    const GrowthFit f = fit_growth(t, e, 2.0, 8.0);
    EXPECT_NEAR(f.rate, 0.137, 1e-6);
    EXPECT_NEAR(f.intercept, std::log(3e-12), 1e-6);
    EXPECT_NEAR(f.r2, 1.0, 1e-12);
    EXPECT_EQ(f.points, 61);
    EXPECT_THROW(fit_growth(t, e, 2.0, 2.15), ConfigError);
    e[50] = 0.0;
    EXPECT_THROW(fit_growth(t, e, 2.0, 8.0), StateError);
    EXPECT_THROW(fit_growth(t, std::vector<double>(3, 1.0), 0.0, 1.0), ConfigError);
}
