#pragma once

#include <array>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace vrmhd {

/// Sizes of a 3D tensor stored with the first index running fastest.
struct Shape {
    std::array<int, 3> n{1, 1, 1};

    int size() const { return n[0] * n[1] * n[2]; }
    int operator[](int axis) const { return n[axis]; }
    bool operator==(const Shape& o) const { return n == o.n; }
};

/// A linear map acting on one tensor axis.
class Op1D {
public:
    enum class Kind { Identity, Sparse, Dense };

    Op1D() = default;
    static Op1D identity(int n);
    static Op1D sparse(Eigen::SparseMatrix<double> m);
    static Op1D dense(Eigen::MatrixXd m);

    Kind kind() const { return kind_; }
    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int out_size(bool transpose) const { return transpose ? cols_ : rows_; }
    int in_size(bool transpose) const { return transpose ? rows_ : cols_; }

    const Eigen::SparseMatrix<double>& sparse_matrix() const { return sparse_; }
    const Eigen::MatrixXd& dense_matrix() const { return dense_; }

    /// Applies the map (or its transpose) along `axis` of a tensor of shape `in`.
    /// `out` must hold the resulting tensor and must not alias `in`.
    void apply(int axis, bool transpose, const double* in, const Shape& shape, double* out) const;

    Eigen::MatrixXd to_dense() const;

private:
    Kind kind_ = Kind::Identity;
    int rows_ = 0;
    int cols_ = 0;
    Eigen::SparseMatrix<double> sparse_;
    Eigen::MatrixXd dense_;
};

/// Kronecker product op[2] (x) op[1] (x) op[0] applied to a tensor; null
/// entries act as identity.
Eigen::VectorXd kron_apply(const std::array<const Op1D*, 3>& ops, const Eigen::VectorXd& in,
                           const Shape& shape, bool transpose = false);

/// Shape after kron_apply.
Shape kron_shape(const std::array<const Op1D*, 3>& ops, const Shape& shape, bool transpose = false);

/// Assembled Kronecker product, for tests and small problems.
Eigen::SparseMatrix<double> kron_matrix(const std::array<const Op1D*, 3>& ops, const Shape& shape,
                                        bool transpose = false);

} // namespace vrmhd
