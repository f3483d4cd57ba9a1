#include "vrmhd/cases.hpp"

#include <cmath>
#include <random>

#include "vrmhd/eos.hpp"
#include "vrmhd/errors.hpp"

namespace vrmhd {

namespace {

using Vec3 = std::array<double, 3>;

AxisParams active(int degree, int cells, Boundary b, double lo, double hi) { return {degree, cells, b, {lo, hi}, true}; }
AxisParams inactive() { return {0, 1, Boundary::Periodic, {0.0, 1.0}, false}; }

double smallest_cell(const CaseSpec& s) {
    double h = std::numeric_limits<double>::infinity();
    for (const auto& a : s.axes)
        if (a.active) h = std::min(h, a.domain.length() / a.cells);
    return h;
}

void set_artificial(CaseSpec& s, bool mu, bool eta) {
    const double h = smallest_cell(s);
    if (mu) s.mu = DissipationSpec::artificial(2.0 * h * h);
    if (eta) s.eta = DissipationSpec::artificial(2.0 * h * h);
}

// Zero velocity coefficients at both ends of clamped axes.
void clamp_velocity(const DeRhamComplex& cx, Field& u) {
    for (const Block& b : cx.layout(SpaceTag::X).blocks)
        for (int a = 0; a < 3; ++a) {
            if (!cx.axis(a).clamped()) continue;
            const Shape& sh = b.shape;
            for (int k = 0; k < sh[2]; ++k)
                for (int j = 0; j < sh[1]; ++j)
                    for (int i = 0; i < sh[0]; ++i) {
                        const std::array<int, 3> idx{i, j, k};
                        if (idx[a] == 0 || idx[a] == sh[a] - 1) u.coeffs[b.offset + i + sh[0] * (j + sh[1] * k)] = 0.0;
                    }
        }
}

double kh_profile(double y, double width) { return -std::tanh((y - 0.5) / width) + std::tanh((y + 0.5) / width); }

double vr_pressure(double x, double y) {
    return 15.0 / 4.0 + 0.25 * std::cos(4.0 * x) + 0.8 * std::cos(2.0 * x) * std::cos(y) - std::cos(x) * std::cos(y) +
           0.25 * std::cos(2.0 * y);
}

} // namespace

const char* to_string(CaseName c) {
    switch (c) {
        case CaseName::CurrentSheet1D: return "CurrentSheet1D";
        case CaseName::Dispersion1D: return "Dispersion1D";
        case CaseName::OrszagTangIdeal: return "OrszagTangIdeal";
        case CaseName::OrszagTangVR: return "OrszagTangVR";
        case CaseName::KelvinHelmholtz: return "KelvinHelmholtz";
        case CaseName::CurrentSheet2D: return "CurrentSheet2D";
    }
    return "?";
}

const std::vector<CaseName>& all_cases() {
    static const std::vector<CaseName> c{CaseName::CurrentSheet1D,  CaseName::Dispersion1D,
                                         CaseName::OrszagTangIdeal, CaseName::OrszagTangVR,
                                         CaseName::KelvinHelmholtz, CaseName::CurrentSheet2D};
    return c;
}

CaseName parse_case_name(const std::string& s) {
    for (CaseName c : all_cases())
        if (s == to_string(c)) return c;
    throw ConfigError("unknown case '" + s + "'");
}

long CaseSpec::steps() const {
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    if (!(t_end >= 0.0)) throw ConfigError("end time must be nonnegative");
    return std::lround(t_end / dt);
}

CaseSpec published_case(CaseName c) {
    CaseSpec s;
    s.name = c;
    s.preset = "published";
    const double twopi = 2.0 * M_PI;
    switch (c) {
        case CaseName::CurrentSheet1D:
            s.axes = {active(2, 128, Boundary::Clamped, -50.0, 50.0), inactive(), inactive()};
            s.gamma = 5.0 / 3.0;
            s.eta = DissipationSpec::constant(0.1);
            s.dt = 2e-3;
            s.t_end = 1000.0;
            s.rho0 = 1.0;
            s.s0 = 9.62;
            s.B0 = {0.0, 0.0, 1e4};
            s.By0 = 1e-3;
            s.t0 = 10.0;
            break;
        case CaseName::Dispersion1D:
            s.axes = {active(2, 128, Boundary::Periodic, 0.0, 10.0), inactive(), inactive()};
            s.gamma = 5.0 / 3.0;
            s.dt = 3e-2;
            s.t_end = 18.0;
            s.rho0 = 1.0;
            s.s0 = std::log(1.0 / (s.gamma - 1.0));
            s.B0 = {1.0, 1.0, 0.0};
            s.amplitude = 1e-2;
            s.enabled.visc = s.enabled.res = false;
            break;
        case CaseName::OrszagTangIdeal:
            s.axes = {active(2, 256, Boundary::Periodic, 0.0, twopi), active(2, 256, Boundary::Periodic, 0.0, twopi),
                      inactive()};
            s.gamma = 5.0 / 3.0;
            s.dt = 1e-3;
            s.t_end = 2.0;
            s.rho0 = s.gamma * s.gamma;
            s.s0 = s.rho0 * std::log(s.gamma / ((s.gamma - 1.0) * std::pow(s.gamma, 2.0 * s.gamma)));
            set_artificial(s, true, true);
            break;
        case CaseName::OrszagTangVR:
            s.axes = {active(2, 256, Boundary::Periodic, 0.0, twopi), active(2, 256, Boundary::Periodic, 0.0, twopi),
                      inactive()};
            s.gamma = 5.0 / 3.0;
            s.dt = 1e-3;
            s.t_end = 2.0;
            s.rho0 = 1.0;
            s.mu = DissipationSpec::constant(0.01);
            s.eta = DissipationSpec::constant(0.01);
            break;
        case CaseName::KelvinHelmholtz:
            s.axes = {active(2, 128, Boundary::Periodic, 0.0, 1.0), active(2, 256, Boundary::Periodic, -1.0, 1.0),
                      inactive()};
            s.gamma = 7.0 / 5.0;
            s.dt = 5e-4;
            s.t_end = 2.0;
            s.amplitude = 0.1;
            s.width = 1.0 / 15.0;
            set_artificial(s, true, false);
            s.enabled.B = s.enabled.res = false;
            break;
        case CaseName::CurrentSheet2D:
            s.axes = {active(2, 128, Boundary::Periodic, 0.0, 6.0 * M_PI),
                      active(2, 256, Boundary::Clamped, -0.5 * M_PI, 0.5 * M_PI), inactive()};
            s.gamma = 5.0 / 3.0;
            s.eta = DissipationSpec::constant(2e-4);
            s.dt = 0.1;
            s.t_end = 40.0;
            s.rho0 = 1.0;
            s.s0 = std::log(5.0 / (2.0 * (s.gamma - 1.0)));
            s.amplitude = 1e-4;
            s.n_modes = 18;
            s.width = 0.1;
            s.linearized_resistivity = true;
            s.enabled.visc = false;
            break;
    }
    return s;
}

CaseSpec desk_case(CaseName c) {
    CaseSpec s = published_case(c);
    s.preset = "desk";
    switch (c) {
        case CaseName::CurrentSheet1D:
            s.t_end = 100.0;
            s.dt = 2e-2;
            break;
        case CaseName::Dispersion1D:
            s.axes[0].cells = 64;
            break;
        case CaseName::OrszagTangIdeal:
            s.axes[0].cells = s.axes[1].cells = 64;
            s.dt = 5e-3;
            s.t_end = 1.0;
            set_artificial(s, true, true);
            break;
        case CaseName::OrszagTangVR:
            s.axes[0].cells = s.axes[1].cells = 64;
            s.dt = 1e-2;
            break;
        case CaseName::KelvinHelmholtz:
            s.axes[0].cells = 32;
            s.axes[1].cells = 64;
            s.dt = 2e-3;
            s.t_end = 0.5;
            set_artificial(s, true, false);
            break;
        case CaseName::CurrentSheet2D:
            s.axes[0].cells = 64;
            s.axes[1].cells = 128;
            break;
    }
    return s;
}

std::vector<CaseSpec> case_table() {
    std::vector<CaseSpec> t;
    for (CaseName c : all_cases()) t.push_back(published_case(c));
    return t;
}

ComplexParams complex_params(const CaseSpec& spec) {
    ComplexParams p;
    p.axes = spec.axes;
    return p;
}

double reference_erf(double x, double t, double eta, double t0, double By0) {
    if (!(eta > 0.0)) throw ConfigError("reference solution needs eta > 0");
    if (!(t + t0 > 0.0)) throw ConfigError("reference solution needs t + t0 > 0");
    return -By0 * std::erf(0.5 * x / std::sqrt(eta * (t + t0)));
}

State init_case(const DeRhamComplex& cx, const CaseSpec& spec) {
    for (int a = 0; a < 3; ++a) {
        const AxisParams& want = spec.axes[a];
        const Axis& have = cx.axis(a);
        if (want.active != have.active || (want.active && (want.cells != have.high.n_cells() ||
                                                           want.boundary != have.high.boundary())))
            throw ConfigError("complex does not match the case geometry");
    }
    const bool two_d = spec.axes[0].active && spec.axes[1].active;
    switch (spec.name) {
        case CaseName::CurrentSheet1D:
        case CaseName::Dispersion1D:
            if (two_d) throw ConfigError(std::string(to_string(spec.name)) + " is one dimensional");
            break;
        default:
            if (!two_d) throw ConfigError(std::string(to_string(spec.name)) + " needs active x and y axes");
    }
    const Eos eos(spec.gamma);
    State st;
    st.time = 0.0;
    const auto zero_vec = [](const Vec3&) { return Vec3{0.0, 0.0, 0.0}; };
    st.u = cx.project_X(zero_vec);
    st.B = cx.project_vector(SpaceTag::V2, zero_vec);

    switch (spec.name) {
        case CaseName::CurrentSheet1D: {
            st.rho = cx.project_scalar(SpaceTag::V3, [&](const Vec3&) { return spec.rho0; });
            st.s = cx.project_scalar(SpaceTag::V3, [&](const Vec3&) { return spec.s0; });
            const double eta = spec.eta.value;
            st.B = cx.project_vector(SpaceTag::V2, [&](const Vec3& x) {
                return Vec3{spec.B0[0], reference_erf(x[0], 0.0, eta, spec.t0, spec.By0), spec.B0[2]};
            });
            break;
        }
        case CaseName::Dispersion1D: {
            st.rho = cx.project_scalar(SpaceTag::V3, [&](const Vec3&) { return spec.rho0; });
            st.s = cx.project_scalar(SpaceTag::V3, [&](const Vec3&) { return spec.s0; });
            st.B = cx.project_vector(SpaceTag::V2, [&](const Vec3&) { return spec.B0; });
            std::mt19937_64 rng(spec.seed);
            std::uniform_real_distribution<double> dist(-spec.amplitude, spec.amplitude);
            for (const Block& b : cx.layout(SpaceTag::X).blocks) {
                Eigen::VectorXd v(cx.node_shape(b.dof_nodes()).size());
                for (int i = 0; i < v.size(); ++i) v[i] = dist(rng);
                st.u.coeffs.segment(b.offset, b.size()) = cx.project_block(b, v);
            }
            break;
        }
        case CaseName::OrszagTangIdeal:
        case CaseName::OrszagTangVR: {
            if (spec.name == CaseName::OrszagTangIdeal) {
                st.rho = cx.project_scalar(SpaceTag::V3, [&](const Vec3&) { return spec.rho0; });
                st.s = cx.project_scalar(SpaceTag::V3, [&](const Vec3&) { return spec.s0; });
            } else {
                st.rho = cx.project_scalar(SpaceTag::V3, [&](const Vec3&) { return spec.rho0; });
                st.s = cx.project_scalar(SpaceTag::V3, [&](const Vec3& x) {
                    return eos.entropy_for_pressure(spec.rho0, vr_pressure(x[0], x[1]));
                });
            }
            st.u = cx.project_X([](const Vec3& x) { return Vec3{-std::sin(x[1]), std::sin(x[0]), 0.0}; });
            st.B = cx.project_vector(SpaceTag::V2,
                                     [](const Vec3& x) { return Vec3{-std::sin(x[1]), std::sin(2.0 * x[0]), 0.0}; });
            break;
        }
        case CaseName::KelvinHelmholtz: {
            const double w = spec.width;
            const auto rho = [&](const Vec3& x) { return 0.5 + 0.75 * kh_profile(x[1], w); };
            st.rho = cx.project_scalar(SpaceTag::V3, rho);
            st.s = cx.project_scalar(SpaceTag::V3, [&](const Vec3& x) { return eos.entropy_for_pressure(rho(x), 1.0); });
            st.u = cx.project_X([&](const Vec3& x) {
                return Vec3{0.5 * (kh_profile(x[1], w) - 1.0), spec.amplitude * std::sin(2.0 * M_PI * x[0]), 0.0};
            });
            break;
        }
        case CaseName::CurrentSheet2D: {
            const double d = spec.width;
            st.rho = cx.project_scalar(SpaceTag::V3, [&](const Vec3&) { return spec.rho0; });
            st.s = cx.project_scalar(SpaceTag::V3, [&](const Vec3&) { return spec.s0; });
            st.B = cx.project_vector(SpaceTag::V2, [&](const Vec3& x) {
                const double bx = std::tanh(x[1] / d);
                return Vec3{bx, 0.0, 1.0 / std::cosh(x[1] / d)};
            });
            if (spec.amplitude != 0.0) {
                const double kscale = 2.0 * M_PI / spec.axes[0].domain.length();
                st.u = cx.project_X([&](const Vec3& x) {
                    const double chi = std::tanh(d * x[1]) / std::cosh(d * x[1]);
                    double sum = 0.0;
                    for (int n = 1; n <= spec.n_modes; ++n) {
                        const double ph = n - 1 < static_cast<int>(spec.phases.size()) ? spec.phases[n - 1] : 0.0;
                        sum += std::sin(kscale * n * x[0] + ph);
                    }
                    return Vec3{0.0, spec.amplitude * chi * sum, 0.0};
                });
            }
            break;
        }
    }
    clamp_velocity(cx, st.u);
    return st;
}

} // namespace vrmhd
