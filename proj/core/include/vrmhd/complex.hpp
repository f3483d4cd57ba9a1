#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "vrmhd/splines.hpp"
#include "vrmhd/tensor.hpp"

namespace vrmhd {

enum class SpaceTag { V0, V1, V2, V3, X };

const char* to_string(SpaceTag tag);

/// Coefficient vector tagged with the space it belongs to.
struct Field {
    SpaceTag tag = SpaceTag::V0;
    Eigen::VectorXd coeffs;

    Field() = default;
    Field(SpaceTag t, Eigen::VectorXd c) : tag(t), coeffs(std::move(c)) {}
};

/// Degree p+1 (High) or degree p (Low) factor of a tensor-product block.
enum class Factor { High = 0, Low = 1 };

/// Per-axis point sets on which spline fields are sampled.
///  Quad    - Gauss points of the mass quadrature
///  Point   - Greville points of the High space (interpolation sites)
///  Segment - Gauss points on the segments between consecutive Greville
///            points (histopolation sites)
enum class NodeSet { Quad = 0, Point = 1, Segment = 2 };

using NodeSets = std::array<NodeSet, 3>;

struct AxisParams {
    int degree = 2;  // degree p of the Low factor
    int cells = 1;
    Boundary boundary = Boundary::Periodic;
    Interval domain{0.0, 1.0};
    bool active = true;  // inactive axes carry one periodic cell of degree 0
};

struct ComplexParams {
    std::array<AxisParams, 3> axes;
    int n_gauss = 0;            // quadrature points per cell; 0 means p+2
    int projection_gauss = 0;   // points per segment piece; 0 means max(p+2, 6)
};

/// One direction of the tensor-product complex.
struct Axis {
    bool active = true;
    SplineSpace1D high;
    SplineSpace1D low;
    Op1D deriv;  // Low x High

    std::vector<double> quad_nodes;
    std::vector<double> quad_weights;
    std::vector<double> point_nodes;
    std::vector<double> segment_nodes;
    Op1D segment_reduce;  // Low dim x segment nodes, quadrature weights

    // eval[node set][factor][derivative order]
    std::array<std::array<std::array<Op1D, 2>, 2>, 3> eval;

    Op1D interp_inv;  // inverse interpolation matrix of the High space
    Op1D hist_inv;    // inverse histopolation matrix of the Low space

    Eigen::MatrixXd mass_high;
    Eigen::MatrixXd mass_low;
    Eigen::MatrixXd stiff_high;  // deriv^T mass_low deriv

    const SplineSpace1D& space(Factor f) const { return f == Factor::High ? high : low; }
    const std::vector<double>& nodes(NodeSet s) const;
    int dim(Factor f) const { return space(f).dimension(); }
    bool clamped() const { return active && high.boundary() == Boundary::Clamped; }

    Axis(SplineSpace1D h, SplineSpace1D l) : high(std::move(h)), low(std::move(l)) {}
};

/// A tensor-product block of a space: one scalar component.
struct Block {
    std::array<Factor, 3> factors{};
    Shape shape;
    int offset = 0;

    int size() const { return shape.size(); }
    /// Interpolation in High directions, histopolation in Low directions.
    NodeSets dof_nodes() const;
};

struct SpaceLayout {
    SpaceTag tag = SpaceTag::V0;
    std::vector<Block> blocks;
    int dim = 0;
};

using ScalarFunction = std::function<double(const std::array<double, 3>&)>;
using VectorFunction = std::function<std::array<double, 3>(const std::array<double, 3>&)>;

/// Tensor-product spline De Rham complex
///   V0 = HHH, V1 = (LHH, HLH, HHL), V2 = (HLL, LHL, LLH), V3 = LLL, X = V0^3
/// with the strong derivative matrices G, C, D and the commuting projectors.
class DeRhamComplex {
public:
    explicit DeRhamComplex(const ComplexParams& params);

    const ComplexParams& params() const { return params_; }
    const Axis& axis(int a) const { return axes_[a]; }
    int logical_dim() const;

    const SpaceLayout& layout(SpaceTag tag) const { return layouts_[static_cast<int>(tag)]; }
    int dim(SpaceTag tag) const { return layout(tag).dim; }

    const SpMat& G() const { return G_; }
    const SpMat& C() const { return C_; }
    const SpMat& D() const { return D_; }

    Field grad(const Field& f) const;
    Field curl(const Field& a) const;
    Field div(const Field& b) const;

    /// Commuting projector Pi^k for k in {0, 3}.
    Field project_scalar(SpaceTag tag, const ScalarFunction& f) const;
    /// Commuting projector Pi^k for k in {1, 2}, and componentwise Pi^0 for X.
    Field project_vector(SpaceTag tag, const VectorFunction& f) const;
    Field project_k(int k, const ScalarFunction& f) const;
    Field project_k(int k, const VectorFunction& f) const;
    Field project_X(const VectorFunction& f) const;

    /// Node coordinates of a node set on one axis.
    const std::vector<double>& nodes(int axis, NodeSet s) const { return axes_[axis].nodes(s); }
    Shape node_shape(const NodeSets& sets) const;
    Shape quad_shape() const { return node_shape({NodeSet::Quad, NodeSet::Quad, NodeSet::Quad}); }
    /// Tensor-product quadrature weights at the quad nodes.
    const Eigen::VectorXd& quad_weights() const { return quad_weights_; }

    /// Samples one block at tensor nodes; deriv_axis >= 0 differentiates
    /// along that axis.
    Eigen::VectorXd eval_block(const Block& b, const double* coeffs, const NodeSets& sets,
                               int deriv_axis = -1) const;
    /// Transpose of eval_block: accumulates into coeffs.
    void eval_block_adjoint(const Block& b, const Eigen::VectorXd& values, const NodeSets& sets,
                            double* coeffs, int deriv_axis = -1) const;

    /// Coefficients of the block whose degrees of freedom equal the given
    /// pointwise values sampled at dof_nodes() of the block.
    Eigen::VectorXd project_block(const Block& b, const Eigen::VectorXd& values) const;
    /// Transpose of project_block.
    Eigen::VectorXd project_block_adjoint(const Block& b, const Eigen::VectorXd& coeffs) const;

    /// Calls f(i, j, k, x) for every tensor node.
    void for_each_node(const NodeSets& sets,
                       const std::function<void(int, const std::array<double, 3>&)>& f) const;

    /// Value of a field at a physical point (for diagnostics and tests).
    std::array<double, 3> point_value(const Field& f, const std::array<double, 3>& x) const;

    /// Smallest cell edge over active axes.
    double min_cell_size() const;

    std::string describe() const;

private:
    void build_layouts();
    void build_derivatives();

    ComplexParams params_;
    std::vector<Axis> axes_;
    std::array<SpaceLayout, 5> layouts_;
    SpMat G_, C_, D_;
    Eigen::VectorXd quad_weights_;
};

DeRhamComplex build_complex(const ComplexParams& params);

} // namespace vrmhd
