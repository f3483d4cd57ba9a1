#pragma once

#include <array>
#include <cmath>
#include <random>

#include <Eigen/Core>

#include "vrmhd/complex.hpp"
#include "vrmhd/galerkin.hpp"
#include "vrmhd/integrators.hpp"

namespace vrmhd::test {

using Vec3 = std::array<double, 3>;
inline const NodeSets kQuad{NodeSet::Quad, NodeSet::Quad, NodeSet::Quad};

inline AxisParams axis(int p, int cells, double lo, double hi, Boundary b = Boundary::Periodic) {
    AxisParams a;
    a.degree = p;
    a.cells = cells;
    a.boundary = b;
    a.domain = {lo, hi};
    return a;
}

inline AxisParams inactive() {
    AxisParams a;
    a.degree = 0;
    a.active = false;
    return a;
}

inline ComplexParams params_2d(int p, int n, bool clamped_y = false) {
    ComplexParams cp;
    cp.axes[0] = axis(p, n, 0.0, 2.0 * M_PI);
    cp.axes[1] = axis(p, n, 0.0, 2.0 * M_PI, clamped_y ? Boundary::Clamped : Boundary::Periodic);
    cp.axes[2] = inactive();
    return cp;
}

inline ComplexParams params_3d(int p, int n) {
    ComplexParams cp;
    for (int a = 0; a < 3; ++a) cp.axes[a] = axis(p, n, 0.0, 1.0);
    return cp;
}

/// Smooth random trigonometric field with a few modes per component.
struct RandomTrig {
    std::array<std::array<double, 4>, 3> amp{}, kx{}, ky{}, kz{}, ph{};
    RandomTrig(std::mt19937_64& rng, const std::array<double, 3>& lengths, int max_k = 2) {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::uniform_int_distribution<int> k(0, max_k);
        for (int c = 0; c < 3; ++c)
            for (int m = 0; m < 4; ++m) {
                amp[c][m] = u(rng);
                kx[c][m] = 2.0 * M_PI * k(rng) / lengths[0];
                ky[c][m] = 2.0 * M_PI * k(rng) / lengths[1];
                kz[c][m] = 2.0 * M_PI * k(rng) / lengths[2];
                ph[c][m] = M_PI * u(rng);
            }
    }
    double value(int c, const Vec3& x) const {
        double v = 0.0;
        for (int m = 0; m < 4; ++m) v += amp[c][m] * std::sin(kx[c][m] * x[0] + ky[c][m] * x[1] + kz[c][m] * x[2] + ph[c][m]);
        return v;
    }
    Vec3 operator()(const Vec3& x) const { return {value(0, x), value(1, x), value(2, x)}; }
    /// Partial derivative of component c along axis a.
    double deriv(int c, int a, const Vec3& x) const {
        const auto& k = a == 0 ? kx : (a == 1 ? ky : kz);
        double v = 0.0;
        for (int m = 0; m < 4; ++m)
            v += amp[c][m] * k[c][m] * std::cos(kx[c][m] * x[0] + ky[c][m] * x[1] + kz[c][m] * x[2] + ph[c][m]);
        return v;
    }
};

inline Eigen::VectorXd random_vector(int n, std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = u(rng);
    return v;
}

/// Smooth state with positive density, divergence-free B with a guide field.
inline State smooth_state(const DeRhamComplex& cx, const Galerkin& gk, std::mt19937_64& rng, double u_scale = 0.3) {
    std::uniform_real_distribution<double> ph(0.0, 2.0 * M_PI);
    const double a = ph(rng), b = ph(rng), c = ph(rng), d = ph(rng);
    const double lx = cx.axis(0).high.domain().length(), ly = cx.axis(1).high.domain().length();
    const double kx = 2.0 * M_PI / lx, ky = 2.0 * M_PI / ly;
    State st;
    const bool clamped = cx.axis(1).clamped();
    st.u = cx.project_X([&](const Vec3& x) {
        const double w = clamped ? std::sin(M_PI * (x[1] - cx.axis(1).high.domain().lo) / ly) : 1.0;
        return Vec3{w * u_scale * std::sin(ky * x[1] + a), w * u_scale * std::cos(kx * x[0] + b),
                    w * 0.5 * u_scale * std::sin(kx * x[0] + ky * x[1] + c)};
    });
    gk.velocity_mask().apply(st.u.coeffs);
    st.rho = cx.project_scalar(SpaceTag::V3,
                               [&](const Vec3& x) { return 1.0 + 0.2 * std::sin(kx * x[0] + d) * std::cos(ky * x[1]); });
    st.s = cx.project_scalar(SpaceTag::V3,
                             [&](const Vec3& x) { return 0.5 + 0.3 * std::cos(kx * x[0] - ky * x[1] + a); });
    const Field A = cx.project_vector(SpaceTag::V1, [&](const Vec3& x) {
        return Vec3{0.0, 0.0, std::cos(ky * x[1] + c) + 0.5 * std::sin(2.0 * kx * x[0] + d)};
    });
    st.B = cx.curl(A);
    st.B.coeffs += cx.project_vector(SpaceTag::V2, [](const Vec3&) { return Vec3{0.0, 0.0, 1.0}; }).coeffs;
    return st;
}

struct Energies {
    double kin = 0, internal = 0, mag = 0, mass = 0, entropy = 0;
    double total() const { return kin + internal + mag; }
};

inline Energies energies(const Galerkin& gk, const Integrator& in, const State& s) {
    Energies e;
    const Eigen::VectorXd rq = gk.eval_quad(SpaceTag::V3, s.rho.coeffs, 0);
    e.kin = 0.5 * s.u.coeffs.dot(gk.weighted_apply(SpaceTag::X, rq, s.u.coeffs));
    e.internal = in.rho_e_quad(s.rho.coeffs, s.s.coeffs).dot(gk.weights());
    e.mag = 0.5 * s.B.coeffs.dot(gk.mass_apply(SpaceTag::V2, s.B.coeffs));
    e.mass = rq.dot(gk.weights());
    e.entropy = gk.eval_quad(SpaceTag::V3, s.s.coeffs, 0).dot(gk.weights());
    return e;
}

/// Physical coordinates of every quadrature node.
inline std::vector<Vec3> quad_points(const DeRhamComplex& cx) {
    std::vector<Vec3> pts(cx.quad_shape().size());
    cx.for_each_node(kQuad, [&](int i, const Vec3& x) { pts[i] = x; });
    return pts;
}

} // namespace vrmhd::test
