#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "support.hpp"
#include "vrmhd/errors.hpp"

using namespace vrmhd;
using namespace vrmhd::test;

namespace {

Eigen::MatrixXd dense(const LinearOperator& op) { return Eigen::MatrixXd(op.matrix()); }

} // namespace

TEST(Galerkin, PiecewiseConstantMassIsDiagonal) {
    ComplexParams cp;
    cp.axes[0] = axis(0, 4, 0.0, 1.0);
    cp.axes[1] = inactive();
    cp.axes[2] = inactive();
    const DeRhamComplex cx = build_complex(cp);
    const Galerkin gk(cx);
    const Eigen::MatrixXd m = dense(gk.mass_matrix(SpaceTag::V3));
    EXPECT_LE((m - 0.25 * Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Galerkin, MassRowSumsIntegrateBasis) {
    for (bool clamped : {false, true}) {
        const DeRhamComplex cx = build_complex(params_2d(2, 5, clamped));
        const Galerkin gk(cx);
        const Eigen::MatrixXd m = dense(gk.mass_matrix(SpaceTag::V0));
        const double area = 4.0 * M_PI * M_PI;
        EXPECT_NEAR(m.sum(), area, 1e-11);
        // int N_i = sum_q w_q N_i(x_q)
        const Eigen::VectorXd ones = Eigen::VectorXd::Ones(gk.quad_size());
        Eigen::VectorXd integrals = Eigen::VectorXd::Zero(cx.dim(SpaceTag::V0));
        gk.eval_quad_adjoint(SpaceTag::V0, 0, ones.cwiseProduct(gk.weights()), integrals);
        EXPECT_LE((m.rowwise().sum() - integrals).cwiseAbs().maxCoeff(), 1e-13);
    }
}

TEST(Galerkin, MassMatricesSymmetricPositiveDefinite) {
    std::mt19937_64 rng(4);
    for (int p = 0; p <= 3; ++p) {
        ComplexParams cp = params_3d(p, p + 2);
        cp.axes[2].boundary = Boundary::Clamped;
        const DeRhamComplex cx = build_complex(cp);
        const Galerkin gk(cx);
        for (SpaceTag t : {SpaceTag::V0, SpaceTag::V1, SpaceTag::V2, SpaceTag::V3, SpaceTag::X}) {
            const Eigen::MatrixXd m = dense(gk.mass_matrix(t));
            EXPECT_LE((m - m.transpose()).cwiseAbs().maxCoeff(), 1e-13 * m.cwiseAbs().maxCoeff());
            Eigen::LLT<Eigen::MatrixXd> llt(m);
            EXPECT_EQ(llt.info(), Eigen::Success) << "p=" << p << " " << to_string(t);
            const Eigen::VectorXd v = random_vector(m.rows(), rng);
            EXPECT_GT(v.dot(gk.mass_apply(t, v)), 0.0);
        }
    }
}

TEST(Galerkin, MassInverseInvertsApply) {
    std::mt19937_64 rng(8);
    const DeRhamComplex cx = build_complex(params_2d(2, 6, true));
    const Galerkin gk(cx);
    for (SpaceTag t : {SpaceTag::V0, SpaceTag::V1, SpaceTag::V2, SpaceTag::V3, SpaceTag::X}) {
        const Eigen::VectorXd x = random_vector(cx.dim(t), rng);
        EXPECT_LE((gk.mass_inverse(t, gk.mass_apply(t, x)) - x).norm(), 1e-11 * x.norm()) << to_string(t);
    }
}

TEST(Galerkin, WeightedMassLinearInWeight) {
    std::mt19937_64 rng(12);
    const DeRhamComplex cx = build_complex(params_2d(2, 5));
    const Galerkin gk(cx);
    for (SpaceTag t : {SpaceTag::X, SpaceTag::V3}) {
        const Eigen::VectorXd x = random_vector(cx.dim(t), rng);
        const Eigen::VectorXd one = Eigen::VectorXd::Ones(gk.quad_size());
        const Eigen::VectorXd m = gk.mass_apply(t, x);
        EXPECT_LE((gk.weighted_apply(t, one, x) - m).norm(), 1e-13 * m.norm());
        EXPECT_LE((gk.weighted_apply(t, 2.0 * one, x) - 2.0 * m).norm(), 1e-13 * m.norm());
    }
}

TEST(Galerkin, DensityWeightedMassAtOrszagTangDensity) {
    const double gamma = 5.0 / 3.0;
    const DeRhamComplex cx = build_complex(params_2d(2, 8));
    const Galerkin gk(cx);
    const Field rho = cx.project_scalar(SpaceTag::V3, [&](const Vec3&) { return gamma * gamma; });
    const Eigen::VectorXd rq = gk.eval_quad(SpaceTag::V3, rho.coeffs, 0);
    const Eigen::MatrixXd w = dense(gk.weighted_mass(SpaceTag::X, rq));
    const Eigen::MatrixXd m = dense(gk.mass_matrix(SpaceTag::X));
    EXPECT_LE((w - gamma * gamma * m).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Galerkin, WeightedSolveRejectsNonpositiveWeight) {
    const DeRhamComplex cx = build_complex(params_2d(1, 4));
    const Galerkin gk(cx);
    Eigen::VectorXd w = Eigen::VectorXd::Ones(gk.quad_size());
    w[3] = -1.0;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(cx.dim(SpaceTag::V3));
    EXPECT_THROW(gk.weighted_solve(SpaceTag::V3, w, Eigen::VectorXd::Ones(x.size()), x), StateError);
    w[3] = std::nan("");
    EXPECT_THROW(gk.weighted_mass(SpaceTag::V3, w), StateError);
}

TEST(Galerkin, WeightedSolveMatchesApply) {
    std::mt19937_64 rng(14);
    const DeRhamComplex cx = build_complex(params_2d(2, 6));
    const Galerkin gk(cx);
    Eigen::VectorXd w(gk.quad_size());
    const auto pts = quad_points(cx);
    for (int i = 0; i < w.size(); ++i) w[i] = 1.0 + 0.5 * std::sin(pts[i][0]) * std::cos(pts[i][1]);
    for (SpaceTag t : {SpaceTag::X, SpaceTag::V3}) {
        const Eigen::VectorXd x = random_vector(cx.dim(t), rng);
        const Eigen::VectorXd b = gk.weighted_apply(t, w, x);
        Eigen::VectorXd y = Eigen::VectorXd::Zero(x.size());
        gk.weighted_solve(t, w, b, y);
        EXPECT_LE((y - x).norm(), 1e-10 * x.norm());
    }
}

TEST(Galerkin, ProjectorRecoversV3Fields) {
    std::mt19937_64 rng(15);
    const DeRhamComplex cx = build_complex(params_2d(2, 6, true));
    const Galerkin gk(cx);
    const Eigen::VectorXd c = random_vector(cx.dim(SpaceTag::V3), rng);
    const Field back = gk.l2_project_3(gk.eval_quad(SpaceTag::V3, c, 0));
    EXPECT_LE((back.coeffs - c).norm(), 1e-11 * c.norm());
    const Field one = gk.l2_project_3(Eigen::VectorXd::Ones(gk.quad_size()));
    EXPECT_NEAR(gk.eval_quad(SpaceTag::V3, one.coeffs, 0).dot(gk.weights()), 4.0 * M_PI * M_PI, 1e-11);
}

TEST(Galerkin, ProjectorIsAdjointToIntegration) {
    const DeRhamComplex cx = build_complex(params_2d(2, 8));
    const Galerkin gk(cx);
    const Field u = cx.project_X([](const Vec3& x) { return Vec3{-std::sin(x[1]), std::sin(x[0]), 0.0}; });
    Eigen::VectorXd g = Eigen::VectorXd::Zero(gk.quad_size());
    for (int c = 0; c < 3; ++c)
        for (int a = 0; a < 3; ++a) g += gk.eval_quad(SpaceTag::X, u.coeffs, c, a).cwiseAbs2();
    const Field pg = gk.l2_project_3(g);
    const double lhs = gk.eval_quad(SpaceTag::V3, pg.coeffs, 0).dot(gk.weights());
    EXPECT_NEAR(lhs, g.dot(gk.weights()), 1e-12 * std::abs(lhs));
    // against every basis function
    const Eigen::VectorXd mp = gk.mass_apply(SpaceTag::V3, pg.coeffs);
    EXPECT_LE((mp - gk.load_3(g)).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(Galerkin, DualCurlIdentity) {
    std::mt19937_64 rng(21);
    const DeRhamComplex cx = build_complex(params_3d(2, 4));
    const Galerkin gk(cx);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::VectorXd a = random_vector(cx.dim(SpaceTag::V1), rng);
        const Eigen::VectorXd b = random_vector(cx.dim(SpaceTag::V2), rng);
        const Eigen::VectorXd j = gk.dual_curl(b);
        const double lhs = j.dot(gk.mass_apply(SpaceTag::V1, a));
        const double rhs = b.dot(gk.mass_apply(SpaceTag::V2, cx.C() * a));
        EXPECT_NEAR(lhs, rhs, 1e-10 * (1.0 + std::abs(rhs)));
    }
}

TEST(Galerkin, DualCurlOfCurlIsNonnegative) {
    std::mt19937_64 rng(22);
    const DeRhamComplex cx = build_complex(params_3d(1, 4));
    const Galerkin gk(cx);
    const Eigen::VectorXd a = random_vector(cx.dim(SpaceTag::V1), rng);
    const Eigen::VectorXd b = cx.C() * a;
    const double v = gk.dual_curl(b).dot(gk.mass_apply(SpaceTag::V1, a));
    EXPECT_NEAR(v, b.dot(gk.mass_apply(SpaceTag::V2, b)), 1e-10 * v);
    EXPECT_GE(v, 0.0);
}

TEST(Galerkin, DualCurlOfConstantVanishes) {
    const DeRhamComplex cx = build_complex(params_3d(2, 4));
    const Galerkin gk(cx);
    const Field b = cx.project_vector(SpaceTag::V2, [](const Vec3&) { return Vec3{0.3, -1.0, 2.0}; });
    EXPECT_LE(gk.dual_curl(b).coeffs.lpNorm<Eigen::Infinity>(), 1e-12);
    EXPECT_THROW(gk.dual_curl(Field(SpaceTag::V1, Eigen::VectorXd::Zero(cx.dim(SpaceTag::V1)))), TypeError);
}

TEST(Galerkin, SolveIdentityAndDiagonal) {
    SpMat id(5, 5);
    id.setIdentity();
    const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(5, 1.0, 5.0);
    EXPECT_LE((solve(LinearOperator::from_matrix(id), b) - b).norm(), 1e-15);
    SpMat d(5, 5);
    for (int i = 0; i < 5; ++i) d.insert(i, i) = i + 2.0;
    const Eigen::VectorXd x = solve(LinearOperator::from_matrix(d), b);
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(x[i], b[i] / (i + 2.0), 1e-15);
}

TEST(Galerkin, SolveMatchesDenseFactorization) {
    std::mt19937_64 rng(30);
    Eigen::MatrixXd a(50, 50);
    for (int i = 0; i < 50; ++i)
        for (int j = 0; j < 50; ++j) a(i, j) = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
    const Eigen::MatrixXd spd = a * a.transpose() + 50.0 * Eigen::MatrixXd::Identity(50, 50);
    const Eigen::VectorXd b = random_vector(50, rng);
    const Eigen::VectorXd want = spd.ldlt().solve(b);
    EXPECT_LE((solve(LinearOperator::from_matrix(spd.sparseView()), b) - want).norm(), 1e-10 * want.norm());
    // same system through PCG
    Eigen::VectorXd x = Eigen::VectorXd::Zero(50);
    const SolveStats st = pcg([&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return spd * v; },
                              [](const Eigen::VectorXd& v) { return v; }, b, x);
    EXPECT_LE(st.residual, 1e-12);
    EXPECT_LE((x - want).norm(), 1e-10 * want.norm());
}

TEST(Galerkin, PcgReportsNonConvergence) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(20, 20);
    for (int i = 0; i < 20; ++i) a(i, i) = std::pow(10.0, i % 7);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(20);
    PcgOptions opt;
    opt.max_iter = 2;
    try {
        pcg([&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return a * v; },
            [](const Eigen::VectorXd& v) { return v; }, Eigen::VectorXd::Ones(20), x, opt);
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_EQ(e.iterations(), 2);
        EXPECT_GT(e.residual(), 1e-12);
    }
}
