#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace vrmhd {

enum class Boundary { Periodic, Clamped };

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
    double length() const { return hi - lo; }
};

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

GaussRule gauss_legendre(int n);

/// Gauss-Legendre points mapped onto every knot cell.
struct QuadratureGrid {
    Eigen::MatrixXd nodes;    // n_cells x n_gauss
    Eigen::MatrixXd weights;  // n_cells x n_gauss

    int n_cells() const { return static_cast<int>(nodes.rows()); }
    int n_gauss() const { return static_cast<int>(nodes.cols()); }
};

/// Univariate spline space of maximal regularity on a uniform mesh.
///
/// Periodic spaces have one basis function per cell. Function j has its
/// support starting at knot j - (degree+1)/2, which places its Greville
/// abscissa inside cell j (at its left knot for odd degree, at its midpoint
/// for even degree), so the abscissae come out sorted. Clamped spaces use the
/// usual open knot vector and have n_cells + degree functions.
class SplineSpace1D {
public:
    SplineSpace1D(int degree, int n_cells, Boundary boundary, Interval domain);

    int degree() const { return degree_; }
    int n_cells() const { return n_cells_; }
    Boundary boundary() const { return boundary_; }
    const Interval& domain() const { return domain_; }
    double cell_size() const { return h_; }
    int dimension() const { return boundary_ == Boundary::Periodic ? n_cells_ : n_cells_ + degree_; }

    /// Knot vector: the open knot vector for clamped spaces, the uniform
    /// breakpoints extended by `degree` knots on each side for periodic ones.
    const std::vector<double>& knots() const { return knots_; }
    const std::vector<double>& greville() const { return greville_; }

    /// Cell containing x; the right end point belongs to the last cell.
    /// Periodic spaces wrap x into the domain first.
    int cell_of(double x) const;

    /// Maps x into [lo, hi) for periodic spaces, identity otherwise.
    double wrap(double x) const;

    /// The degree+1 basis functions (or first derivatives) that may be nonzero
    /// at x, as global indices and values. `indices` and `values` must have
    /// room for degree+1 entries.
    void eval(double x, int deriv_order, int* indices, double* values) const;

    /// Same as eval, returning (index, value) pairs. Throws DomainError for
    /// points outside a clamped domain.
    std::vector<std::pair<int, double>> eval_basis(double x, int deriv_order) const;

    /// Value of the spline with the given coefficients at x.
    double eval_spline(const Eigen::VectorXd& coeffs, double x, int deriv_order = 0) const;

    QuadratureGrid quadrature(int n_gauss) const;

private:
    void basis_in_cell(int cell, double x, int degree, double* values) const;
    int global_index(int cell, int r) const;

    int degree_;
    int n_cells_;
    Boundary boundary_;
    Interval domain_;
    double h_;
    std::vector<double> knots_;
    std::vector<double> greville_;
};

SplineSpace1D build_space(int degree, int n_cells, Boundary boundary, Interval domain);

using SpMat = Eigen::SparseMatrix<double>;

/// Rows are points, columns basis functions.
SpMat collocation_matrix(const SplineSpace1D& space, const std::vector<double>& points, int deriv_order);

/// Coefficient map of d/dx from the degree p+1 space to the degree p space
/// on the same mesh and boundary mode.
SpMat derivative_matrix(const SplineSpace1D& high, const SplineSpace1D& low);

inline std::vector<double> greville_points(const SplineSpace1D& space) { return space.greville(); }

inline QuadratureGrid quadrature_grid(const SplineSpace1D& space, int n_gauss) {
    return space.quadrature(n_gauss);
}

} // namespace vrmhd
