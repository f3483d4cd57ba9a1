#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "vrmhd/complex.hpp"

namespace vrmhd {

/// Weight samples at every node of the 3D quadrature grid.
using WeightFunction = Eigen::VectorXd;

struct SolveStats {
    int iterations = 0;
    double residual = 0.0;  // relative residual of the returned iterate
};

struct PcgOptions {
    double tol = 1e-12;
    int max_iter = 5000;
};

using VecFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Preconditioned conjugate gradients; x holds the initial guess on entry.
/// Throws NumericalError when max_iter is exceeded.
SolveStats pcg(const VecFn& apply, const VecFn& precond, const Eigen::VectorXd& b, Eigen::VectorXd& x,
               const PcgOptions& opt = {});

/// Square operator with an application and a solve; `matrix()` assembles it
/// column by column when no explicit matrix is available.
class LinearOperator {
public:
    LinearOperator(int n, VecFn apply, VecFn solve);

    static LinearOperator from_matrix(const SpMat& m);

    int rows() const { return n_; }
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
    Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
    SpMat matrix() const;

private:
    int n_;
    VecFn apply_;
    VecFn solve_;
    std::optional<SpMat> explicit_;
};

Eigen::VectorXd solve(const LinearOperator& op, const Eigen::VectorXd& rhs);

/// Essential boundary set: per block, per axis, whether the two end
/// coefficients of the High factor are fixed.
struct BoundaryMask {
    std::vector<std::array<bool, 3>> fix_ends;
    Eigen::VectorXd free;  // 1 on free coefficients, 0 on fixed ones

    bool empty() const { return free.size() == 0 || free.minCoeff() > 0.5; }
    void apply(Eigen::VectorXd& v) const {
        if (!empty()) v.array() *= free.array();
    }
};

/// Mass matrices, weighted mass operators and projections built on a complex.
class Galerkin {
public:
    explicit Galerkin(const DeRhamComplex& cx);

    const DeRhamComplex& complex() const { return cx_; }
    int quad_size() const { return quad_size_; }
    const Eigen::VectorXd& weights() const { return cx_.quad_weights(); }

    /// Samples block `block` of a field at the quadrature nodes.
    Eigen::VectorXd eval_quad(SpaceTag tag, const Eigen::VectorXd& coeffs, int block, int deriv_axis = -1) const;
    void eval_quad_adjoint(SpaceTag tag, int block, const Eigen::VectorXd& values, Eigen::VectorXd& coeffs,
                           int deriv_axis = -1) const;

    Eigen::VectorXd mass_apply(SpaceTag tag, const Eigen::VectorXd& x) const;
    /// Exact inverse of the (optionally masked) Kronecker mass matrix.
    Eigen::VectorXd mass_inverse(SpaceTag tag, const Eigen::VectorXd& b, const BoundaryMask* mask = nullptr) const;

    /// Gram matrix of int w a b.
    Eigen::VectorXd weighted_apply(SpaceTag tag, const WeightFunction& w, const Eigen::VectorXd& x) const;
    /// Solves M[w] x = b by PCG, warm started from x. Requires w > 0.
    SolveStats weighted_solve(SpaceTag tag, const WeightFunction& w, const Eigen::VectorXd& b, Eigen::VectorXd& x,
                              const BoundaryMask* mask = nullptr, const PcgOptions& opt = {}) const;

    LinearOperator mass_matrix(SpaceTag tag) const;
    LinearOperator weighted_mass(SpaceTag tag, const WeightFunction& w) const;

    /// Load vector int g q_i for V3 basis functions q_i.
    Eigen::VectorXd load_3(const Eigen::VectorXd& values) const;
    /// L2 projection of quadrature-node data into V3.
    Field l2_project_3(const Eigen::VectorXd& values) const;

    /// Weak curl of a V2 field: int curl~(B).A = int B.curl(A) for all admissible A.
    Field dual_curl(const Field& B) const;
    Eigen::VectorXd dual_curl(const Eigen::VectorXd& b) const;

    /// Velocity coefficients vanishing on clamped walls.
    const BoundaryMask& velocity_mask() const { return velocity_mask_; }
    /// V1 test functions with vanishing tangential trace on clamped walls.
    const BoundaryMask& tangential_mask() const { return tangential_mask_; }

    /// Solves (beta M0 + sum_a alpha_a S_a) y = x on one HHH block with the
    /// velocity boundary set, S_a the stiffness along axis a.
    Eigen::VectorXd fast_diag_solve(const Eigen::VectorXd& x, double beta, const std::array<double, 3>& alpha) const;

    /// Sum over components c and axes d of int mu d_d u_c d_d v_c.
    Eigen::VectorXd stiffness_X(const WeightFunction& mu, const Eigen::VectorXd& u) const;

private:
    BoundaryMask make_mask(SpaceTag tag, const std::function<bool(int block, int axis)>& fixed) const;
    const Op1D& mass_inv_1d(int axis, Factor f, bool fixed) const;

    const DeRhamComplex& cx_;
    int quad_size_ = 0;
    // [axis][factor][fixed]
    std::array<std::array<std::array<Op1D, 2>, 2>, 3> mass_inv_;
    std::array<std::array<Op1D, 2>, 3> mass_op_;
    // fast diagonalisation of (stiff_high, mass_high) with the velocity boundary set
    std::array<Op1D, 3> fd_vec_;
    std::array<Eigen::VectorXd, 3> fd_val_;
    BoundaryMask velocity_mask_;
    BoundaryMask tangential_mask_;
};

} // namespace vrmhd
