#include "vrmhd/galerkin.hpp"

#include <cmath>
#include <memory>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "vrmhd/errors.hpp"

namespace vrmhd {

using Eigen::MatrixXd;
using Eigen::VectorXd;

SolveStats pcg(const VecFn& apply, const VecFn& precond, const VectorXd& b, VectorXd& x, const PcgOptions& opt) {
    SolveStats st;
    const double bnorm = b.norm();
    if (x.size() != b.size()) x = VectorXd::Zero(b.size());
    if (bnorm == 0.0) {
        x.setZero();
        return st;
    }
    VectorXd r = b - apply(x);
    double rnorm = r.norm();
    st.residual = rnorm / bnorm;
    if (st.residual <= opt.tol) return st;
    VectorXd z = precond(r);
    VectorXd p = z;
    double rz = r.dot(z);
    for (int it = 1; it <= opt.max_iter; ++it) {
        const VectorXd ap = apply(p);
        const double pap = p.dot(ap);
        if (!(pap > 0.0)) throw NumericalError("pcg: operator is not positive definite", it, st.residual);
        const double alpha = rz / pap;
        x.noalias() += alpha * p;
        r.noalias() -= alpha * ap;
        rnorm = r.norm();
        st.iterations = it;
        st.residual = rnorm / bnorm;
        if (st.residual <= opt.tol) {
            // guard against drift of the recursive residual
            const double true_res = (b - apply(x)).norm() / bnorm;
            st.residual = true_res;
            if (true_res <= 10.0 * opt.tol) return st;
            r = b - apply(x);
        }
        z = precond(r);
        const double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    throw NumericalError("pcg: no convergence", st.iterations, st.residual);
}

LinearOperator::LinearOperator(int n, VecFn apply, VecFn solve)
    : n_(n), apply_(std::move(apply)), solve_(std::move(solve)) {}

LinearOperator LinearOperator::from_matrix(const SpMat& m) {
    if (m.rows() != m.cols()) throw ConfigError("LinearOperator: matrix must be square");
    auto llt = std::make_shared<Eigen::SimplicialLDLT<SpMat>>(m);
    if (llt->info() != Eigen::Success) throw NumericalError("LinearOperator: factorisation failed", 0, 0.0);
    LinearOperator op(
        static_cast<int>(m.rows()), [m](const VectorXd& x) -> VectorXd { return m * x; },
        [llt](const VectorXd& b) -> VectorXd { return llt->solve(b); });
    op.explicit_ = m;
    return op;
}

VectorXd LinearOperator::apply(const VectorXd& x) const {
    if (x.size() != n_) throw TypeError("LinearOperator::apply: size mismatch");
    return apply_(x);
}

VectorXd LinearOperator::solve(const VectorXd& b) const {
    if (b.size() != n_) throw TypeError("LinearOperator::solve: size mismatch");
    return solve_(b);
}

SpMat LinearOperator::matrix() const {
    if (explicit_) return *explicit_;
    std::vector<Eigen::Triplet<double>> trip;
    VectorXd e = VectorXd::Zero(n_);
    for (int j = 0; j < n_; ++j) {
        e[j] = 1.0;
        const VectorXd col = apply_(e);
        e[j] = 0.0;
        for (int i = 0; i < n_; ++i)
            if (col[i] != 0.0) trip.emplace_back(i, j, col[i]);
    }
    SpMat m(n_, n_);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

VectorXd solve(const LinearOperator& op, const VectorXd& rhs) { return op.solve(rhs); }

namespace {

MatrixXd masked_inverse(const MatrixXd& m, bool fixed) {
    const int n = static_cast<int>(m.rows());
    if (!fixed || n < 2) return m.inverse();
    MatrixXd a = m;
    for (int idx : {0, n - 1}) {
        a.row(idx).setZero();
        a.col(idx).setZero();
        a(idx, idx) = 1.0;
    }
    MatrixXd inv = a.inverse();
    for (int idx : {0, n - 1}) {
        inv.row(idx).setZero();
        inv.col(idx).setZero();
    }
    return inv;
}

} // namespace

Galerkin::Galerkin(const DeRhamComplex& cx) : cx_(cx) {
    quad_size_ = cx.quad_shape().size();
    for (int a = 0; a < 3; ++a) {
        const Axis& ax = cx.axis(a);
        for (int f = 0; f < 2; ++f) {
            const MatrixXd& m = f == 0 ? ax.mass_high : ax.mass_low;
            mass_op_[a][f] = Op1D::sparse(m.sparseView(1e-300, 1.0));
            mass_inv_[a][f][0] = Op1D::dense(masked_inverse(m, false));
            mass_inv_[a][f][1] = Op1D::dense(masked_inverse(m, f == 0 && ax.clamped()));
        }
        // fast diagonalisation on the free High coefficients
        const int n = ax.dim(Factor::High);
        std::vector<int> free_idx;
        for (int i = 0; i < n; ++i)
            if (!(ax.clamped() && (i == 0 || i == n - 1))) free_idx.push_back(i);
        const int nf = static_cast<int>(free_idx.size());
        MatrixXd sf(nf, nf), mf(nf, nf);
        for (int i = 0; i < nf; ++i)
            for (int j = 0; j < nf; ++j) {
                sf(i, j) = ax.stiff_high(free_idx[i], free_idx[j]);
                mf(i, j) = ax.mass_high(free_idx[i], free_idx[j]);
            }
        Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(sf, mf);
        if (es.info() != Eigen::Success) throw NumericalError("fast diagonalisation failed", 0, 0.0);
        MatrixXd v = MatrixXd::Zero(n, nf);
        for (int i = 0; i < nf; ++i) v.row(free_idx[i]) = es.eigenvectors().row(i);
        fd_vec_[a] = Op1D::dense(v);
        fd_val_[a] = es.eigenvalues().cwiseMax(0.0);
    }
    velocity_mask_ = make_mask(SpaceTag::X, [&](int, int a) { return cx_.axis(a).clamped(); });
    tangential_mask_ = make_mask(SpaceTag::V1, [&](int b, int a) { return a != b && cx_.axis(a).clamped(); });
}

BoundaryMask Galerkin::make_mask(SpaceTag tag, const std::function<bool(int, int)>& fixed) const {
    const SpaceLayout& lay = cx_.layout(tag);
    BoundaryMask m;
    m.free = VectorXd::Ones(lay.dim);
    for (std::size_t bi = 0; bi < lay.blocks.size(); ++bi) {
        const Block& b = lay.blocks[bi];
        std::array<bool, 3> fe{};
        for (int a = 0; a < 3; ++a) fe[a] = fixed(static_cast<int>(bi), a) && b.factors[a] == Factor::High;
        m.fix_ends.push_back(fe);
        int idx = b.offset;
        for (int k = 0; k < b.shape[2]; ++k)
            for (int j = 0; j < b.shape[1]; ++j)
                for (int i = 0; i < b.shape[0]; ++i, ++idx) {
                    const std::array<int, 3> ijk{i, j, k};
                    for (int a = 0; a < 3; ++a)
                        if (fe[a] && (ijk[a] == 0 || ijk[a] == b.shape[a] - 1)) m.free[idx] = 0.0;
                }
    }
    return m;
}

const Op1D& Galerkin::mass_inv_1d(int axis, Factor f, bool fixed) const {
    return mass_inv_[axis][static_cast<int>(f)][fixed ? 1 : 0];
}

VectorXd Galerkin::eval_quad(SpaceTag tag, const VectorXd& coeffs, int block, int deriv_axis) const {
    const Block& b = cx_.layout(tag).blocks[block];
    return cx_.eval_block(b, coeffs.data() + b.offset, {NodeSet::Quad, NodeSet::Quad, NodeSet::Quad}, deriv_axis);
}

void Galerkin::eval_quad_adjoint(SpaceTag tag, int block, const VectorXd& values, VectorXd& coeffs,
                                 int deriv_axis) const {
    const Block& b = cx_.layout(tag).blocks[block];
    cx_.eval_block_adjoint(b, values, {NodeSet::Quad, NodeSet::Quad, NodeSet::Quad}, coeffs.data() + b.offset,
                           deriv_axis);
}

VectorXd Galerkin::mass_apply(SpaceTag tag, const VectorXd& x) const {
    const SpaceLayout& lay = cx_.layout(tag);
    if (x.size() != lay.dim) throw TypeError(std::string("mass_apply: wrong length for ") + to_string(tag));
    VectorXd out(lay.dim);
    for (const Block& b : lay.blocks) {
        std::array<const Op1D*, 3> ops{};
        for (int a = 0; a < 3; ++a) ops[a] = &mass_op_[a][static_cast<int>(b.factors[a])];
        out.segment(b.offset, b.size()) = kron_apply(ops, x.segment(b.offset, b.size()), b.shape);
    }
    return out;
}

VectorXd Galerkin::mass_inverse(SpaceTag tag, const VectorXd& rhs, const BoundaryMask* mask) const {
    const SpaceLayout& lay = cx_.layout(tag);
    if (rhs.size() != lay.dim) throw TypeError(std::string("mass_inverse: wrong length for ") + to_string(tag));
    VectorXd out(lay.dim);
    for (std::size_t bi = 0; bi < lay.blocks.size(); ++bi) {
        const Block& b = lay.blocks[bi];
        std::array<const Op1D*, 3> ops{};
        for (int a = 0; a < 3; ++a) {
            const bool fixed = mask && !mask->fix_ends.empty() && mask->fix_ends[bi][a];
            ops[a] = &mass_inv_1d(a, b.factors[a], fixed);
        }
        out.segment(b.offset, b.size()) = kron_apply(ops, rhs.segment(b.offset, b.size()), b.shape);
    }
    return out;
}

VectorXd Galerkin::weighted_apply(SpaceTag tag, const WeightFunction& w, const VectorXd& x) const {
    const SpaceLayout& lay = cx_.layout(tag);
    if (x.size() != lay.dim) throw TypeError(std::string("weighted_apply: wrong length for ") + to_string(tag));
    if (w.size() != quad_size_) throw TypeError("weighted_apply: weight does not live on the quadrature grid");
    VectorXd out = VectorXd::Zero(lay.dim);
    const VectorXd ww = w.cwiseProduct(weights());
    for (std::size_t bi = 0; bi < lay.blocks.size(); ++bi) {
        VectorXd v = eval_quad(tag, x, static_cast<int>(bi));
        v.array() *= ww.array();
        eval_quad_adjoint(tag, static_cast<int>(bi), v, out);
    }
    return out;
}

SolveStats Galerkin::weighted_solve(SpaceTag tag, const WeightFunction& w, const VectorXd& b, VectorXd& x,
                                    const BoundaryMask* mask, const PcgOptions& opt) const {
    if (w.size() != quad_size_) throw TypeError("weighted_solve: weight does not live on the quadrature grid");
    if (!w.allFinite()) throw StateError("weighted_solve: non-finite weight");
    if (w.minCoeff() <= 0.0) throw StateError("weighted_solve: weight must be positive");
    const SpaceLayout& lay = cx_.layout(tag);
    // Jacobi-like scaling by the local mean weight around the Kronecker inverse
    VectorXd load_w = VectorXd::Zero(lay.dim), load_1 = VectorXd::Zero(lay.dim);
    const VectorXd ww = w.cwiseProduct(weights());
    for (std::size_t bi = 0; bi < lay.blocks.size(); ++bi) {
        eval_quad_adjoint(tag, static_cast<int>(bi), ww, load_w);
        eval_quad_adjoint(tag, static_cast<int>(bi), weights(), load_1);
    }
    VectorXd scale(lay.dim);
    for (int i = 0; i < lay.dim; ++i) {
        const double wb = load_1[i] > 0.0 ? load_w[i] / load_1[i] : 1.0;
        scale[i] = 1.0 / std::sqrt(wb > 0.0 ? wb : w.maxCoeff());
    }
    const bool masked = mask && !mask->empty();
    auto apply = [&](const VectorXd& v) -> VectorXd {
        if (!masked) return weighted_apply(tag, w, v);
        VectorXd vm = v;
        mask->apply(vm);
        VectorXd r = weighted_apply(tag, w, vm);
        mask->apply(r);
        return r;
    };
    auto precond = [&](const VectorXd& r) -> VectorXd {
        VectorXd t = r.cwiseProduct(scale);
        t = mass_inverse(tag, t, masked ? mask : nullptr);
        return t.cwiseProduct(scale);
    };
    VectorXd rhs = b;
    if (masked) {
        mask->apply(rhs);
        if (x.size() == rhs.size()) mask->apply(x);
    }
    return pcg(apply, precond, rhs, x, opt);
}

LinearOperator Galerkin::mass_matrix(SpaceTag tag) const {
    return LinearOperator(
        cx_.dim(tag), [this, tag](const VectorXd& x) { return mass_apply(tag, x); },
        [this, tag](const VectorXd& b) { return mass_inverse(tag, b); });
}

LinearOperator Galerkin::weighted_mass(SpaceTag tag, const WeightFunction& w) const {
    if (w.size() != quad_size_) throw TypeError("weighted_mass: weight does not live on the quadrature grid");
    if (!w.allFinite()) throw StateError("weighted_mass: non-finite weight");
    return LinearOperator(
        cx_.dim(tag), [this, tag, w](const VectorXd& x) { return weighted_apply(tag, w, x); },
        [this, tag, w](const VectorXd& b) {
            VectorXd x = VectorXd::Zero(b.size());
            weighted_solve(tag, w, b, x);
            return x;
        });
}

VectorXd Galerkin::load_3(const VectorXd& values) const {
    if (values.size() != quad_size_) throw TypeError("load_3: data does not live on the quadrature grid");
    VectorXd out = VectorXd::Zero(cx_.dim(SpaceTag::V3));
    eval_quad_adjoint(SpaceTag::V3, 0, values.cwiseProduct(weights()), out);
    return out;
}

Field Galerkin::l2_project_3(const VectorXd& values) const {
    if (!values.allFinite()) throw NumericalError("l2_project_3: non-finite data", 0, 0.0);
    return {SpaceTag::V3, mass_inverse(SpaceTag::V3, load_3(values))};
}

VectorXd Galerkin::dual_curl(const VectorXd& b) const {
    const VectorXd rhs = cx_.C().transpose() * mass_apply(SpaceTag::V2, b);
    return mass_inverse(SpaceTag::V1, rhs, &tangential_mask_);
}

Field Galerkin::dual_curl(const Field& B) const {
    if (B.tag != SpaceTag::V2) throw TypeError("dual_curl: expected a field in V2");
    if (B.coeffs.size() != cx_.dim(SpaceTag::V2)) throw TypeError("dual_curl: wrong coefficient length");
    return {SpaceTag::V1, dual_curl(B.coeffs)};
}

VectorXd Galerkin::fast_diag_solve(const VectorXd& x, double beta, const std::array<double, 3>& alpha) const {
    const Block& b = cx_.layout(SpaceTag::V0).blocks[0];
    std::array<const Op1D*, 3> ops{&fd_vec_[0], &fd_vec_[1], &fd_vec_[2]};
    VectorXd y = kron_apply(ops, x, b.shape, true);
    const int n0 = static_cast<int>(fd_val_[0].size());
    const int n1 = static_cast<int>(fd_val_[1].size());
    const int n2 = static_cast<int>(fd_val_[2].size());
    int idx = 0;
    for (int k = 0; k < n2; ++k)
        for (int j = 0; j < n1; ++j)
            for (int i = 0; i < n0; ++i, ++idx)
                y[idx] /= beta + alpha[0] * fd_val_[0][i] + alpha[1] * fd_val_[1][j] + alpha[2] * fd_val_[2][k];
    Shape s;
    s.n = {n0, n1, n2};
    return kron_apply(ops, y, s);
}

VectorXd Galerkin::stiffness_X(const WeightFunction& mu, const VectorXd& u) const {
    VectorXd out = VectorXd::Zero(cx_.dim(SpaceTag::X));
    const VectorXd ww = mu.cwiseProduct(weights());
    for (int c = 0; c < 3; ++c)
        for (int d = 0; d < 3; ++d) {
            if (!cx_.axis(d).active) continue;
            VectorXd g = eval_quad(SpaceTag::X, u, c, d);
            g.array() *= ww.array();
            eval_quad_adjoint(SpaceTag::X, c, g, out, d);
        }
    return out;
}

} // namespace vrmhd
