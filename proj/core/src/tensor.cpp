#include "vrmhd/tensor.hpp"

#include <algorithm>
#include <cstring>

#include <unsupported/Eigen/KroneckerProduct>

#include "vrmhd/errors.hpp"

namespace vrmhd {

using Eigen::Map;
using Eigen::MatrixXd;

Op1D Op1D::identity(int n) {
    Op1D op;
    op.kind_ = Kind::Identity;
    op.rows_ = op.cols_ = n;
    return op;
}

Op1D Op1D::sparse(Eigen::SparseMatrix<double> m) {
    Op1D op;
    op.kind_ = Kind::Sparse;
    op.rows_ = static_cast<int>(m.rows());
    op.cols_ = static_cast<int>(m.cols());
    m.makeCompressed();
    op.sparse_ = std::move(m);
    return op;
}

Op1D Op1D::dense(Eigen::MatrixXd m) {
    Op1D op;
    op.kind_ = Kind::Dense;
    op.rows_ = static_cast<int>(m.rows());
    op.cols_ = static_cast<int>(m.cols());
    op.dense_ = std::move(m);
    return op;
}

Eigen::MatrixXd Op1D::to_dense() const {
    switch (kind_) {
    case Kind::Identity: return MatrixXd::Identity(rows_, cols_);
    case Kind::Sparse: return MatrixXd(sparse_);
    case Kind::Dense: return dense_;
    }
    return {};
}

void Op1D::apply(int axis, bool transpose, const double* in, const Shape& s, double* out) const {
    if (s[axis] != in_size(transpose)) throw TypeError("Op1D::apply: axis size mismatch");
    const int m = out_size(transpose);
    const int n0 = s[0], n1 = s[1], n2 = s[2];
    if (kind_ == Kind::Identity) {
        std::memcpy(out, in, sizeof(double) * s.size());
        return;
    }
    auto left = [&](const Map<const MatrixXd>& x, Map<MatrixXd>& y) {
        // y = A x
        if (kind_ == Kind::Sparse) {
            if (transpose) y.noalias() = sparse_.transpose() * x;
            else y.noalias() = sparse_ * x;
        } else {
            if (transpose) y.noalias() = dense_.transpose() * x;
            else y.noalias() = dense_ * x;
        }
    };
    auto right = [&](const Map<const MatrixXd>& x, Map<MatrixXd>& y) {
        // y = x A^T
        if (kind_ == Kind::Sparse) {
            if (transpose) y.noalias() = x * sparse_;
            else y.noalias() = x * sparse_.transpose();
        } else {
            if (transpose) y.noalias() = x * dense_;
            else y.noalias() = x * dense_.transpose();
        }
    };
    if (axis == 0) {
        Map<const MatrixXd> x(in, n0, n1 * n2);
        Map<MatrixXd> y(out, m, n1 * n2);
        left(x, y);
    } else if (axis == 2) {
        Map<const MatrixXd> x(in, n0 * n1, n2);
        Map<MatrixXd> y(out, n0 * n1, m);
        right(x, y);
    } else {
        if (n0 == 1) {
            Map<const MatrixXd> x(in, n1, n2);
            Map<MatrixXd> y(out, m, n2);
            left(x, y);
            return;
        }
        for (int k = 0; k < n2; ++k) {
            Map<const MatrixXd> x(in + static_cast<std::ptrdiff_t>(k) * n0 * n1, n0, n1);
            Map<MatrixXd> y(out + static_cast<std::ptrdiff_t>(k) * n0 * m, n0, m);
            right(x, y);
        }
    }
}

Shape kron_shape(const std::array<const Op1D*, 3>& ops, const Shape& shape, bool transpose) {
    Shape out = shape;
    for (int a = 0; a < 3; ++a)
        if (ops[a]) out.n[a] = ops[a]->out_size(transpose);
    return out;
}

Eigen::VectorXd kron_apply(const std::array<const Op1D*, 3>& ops, const Eigen::VectorXd& in,
                           const Shape& shape, bool transpose) {
    if (in.size() != shape.size()) throw TypeError("kron_apply: vector does not match its shape");
    // Shrinking axes first keeps the intermediate tensors small.
    std::array<int, 3> order{0, 1, 2};
    std::array<double, 3> ratio{};
    for (int a = 0; a < 3; ++a) {
        ratio[a] = (ops[a] && ops[a]->kind() != Op1D::Kind::Identity)
                       ? double(ops[a]->out_size(transpose)) / ops[a]->in_size(transpose)
                       : 1e300;
    }
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return ratio[a] < ratio[b]; });

    Eigen::VectorXd cur = in;
    Eigen::VectorXd next;
    Shape s = shape;
    for (int a : order) {
        const Op1D* op = ops[a];
        if (!op || op->kind() == Op1D::Kind::Identity) {
            if (op && op->in_size(transpose) != s[a]) throw TypeError("kron_apply: identity size mismatch");
            continue;
        }
        Shape t = s;
        t.n[a] = op->out_size(transpose);
        next.resize(t.size());
        op->apply(a, transpose, cur.data(), s, next.data());
        cur.swap(next);
        s = t;
    }
    return cur;
}

Eigen::SparseMatrix<double> kron_matrix(const std::array<const Op1D*, 3>& ops, const Shape& shape,
                                        bool transpose) {
    std::array<Eigen::SparseMatrix<double>, 3> f;
    for (int a = 0; a < 3; ++a) {
        Eigen::SparseMatrix<double> m;
        if (!ops[a] || ops[a]->kind() == Op1D::Kind::Identity) {
            m.resize(shape[a], shape[a]);
            m.setIdentity();
        } else if (ops[a]->kind() == Op1D::Kind::Sparse) {
            m = ops[a]->sparse_matrix();
        } else {
            m = ops[a]->dense_matrix().sparseView();
        }
        if (transpose) m = Eigen::SparseMatrix<double>(m.transpose());
        f[a] = m;
    }
    Eigen::SparseMatrix<double> k21 = Eigen::kroneckerProduct(f[2], f[1]);
    return Eigen::kroneckerProduct(k21, f[0]);
}

} // namespace vrmhd
