#include "vrmhd/complex.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/LU>

#include "vrmhd/errors.hpp"

namespace vrmhd {

const char* to_string(SpaceTag tag) {
    switch (tag) {
    case SpaceTag::V0: return "V0";
    case SpaceTag::V1: return "V1";
    case SpaceTag::V2: return "V2";
    case SpaceTag::V3: return "V3";
    case SpaceTag::X: return "X";
    }
    return "?";
}

const std::vector<double>& Axis::nodes(NodeSet s) const {
    switch (s) {
    case NodeSet::Quad: return quad_nodes;
    case NodeSet::Point: return point_nodes;
    case NodeSet::Segment: return segment_nodes;
    }
    return quad_nodes;
}

NodeSets Block::dof_nodes() const {
    NodeSets s{};
    for (int a = 0; a < 3; ++a) s[a] = factors[a] == Factor::High ? NodeSet::Point : NodeSet::Segment;
    return s;
}

namespace {

Eigen::MatrixXd dense_inverse(const Eigen::MatrixXd& m, const char* what) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    if (!lu.isInvertible()) throw NumericalError(std::string("singular ") + what + " matrix", 0, 0.0);
    return lu.inverse();
}

Axis make_axis(const AxisParams& ap, int n_gauss, int proj_gauss) {
    if (!ap.active) {
        Axis ax(SplineSpace1D(0, 1, Boundary::Periodic, ap.domain),
                SplineSpace1D(0, 1, Boundary::Periodic, ap.domain));
        ax.active = false;
        ax.deriv = Op1D::sparse(SpMat(1, 1));
        const double mid = 0.5 * (ap.domain.lo + ap.domain.hi);
        const double L = ap.domain.length();
        ax.quad_nodes = {mid};
        ax.quad_weights = {L};
        ax.point_nodes = {mid};
        ax.segment_nodes = {mid};
        SpMat r(1, 1);
        r.insert(0, 0) = L;
        ax.segment_reduce = Op1D::sparse(r);
        return ax;
    }
    if (ap.degree < 0) throw ConfigError("axis degree must be nonnegative");
    Axis ax(build_space(ap.degree + 1, ap.cells, ap.boundary, ap.domain),
            build_space(ap.degree, ap.cells, ap.boundary, ap.domain));
    ax.active = true;
    ax.deriv = Op1D::sparse(derivative_matrix(ax.high, ax.low));

    const int ng = n_gauss > 0 ? n_gauss : ap.degree + 2;
    const QuadratureGrid q = ax.high.quadrature(ng);
    for (int c = 0; c < q.n_cells(); ++c)
        for (int k = 0; k < q.n_gauss(); ++k) {
            ax.quad_nodes.push_back(q.nodes(c, k));
            ax.quad_weights.push_back(q.weights(c, k));
        }

    ax.point_nodes = ax.high.greville();

    // Histopolation segments between consecutive Greville points, split at
    // the knots so every piece is integrated by a polynomial-exact rule.
    const int npg = proj_gauss > 0 ? proj_gauss : std::max(ap.degree + 2, 6);
    const GaussRule g = gauss_legendre(npg);
    const auto& gv = ax.high.greville();
    const int nseg = ax.low.dimension();
    const double L = ap.domain.length();
    const double h = ax.high.cell_size();
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < nseg; ++i) {
        const double s0 = gv[i];
        const double s1 = (i + 1 < static_cast<int>(gv.size())) ? gv[i + 1] : gv[0] + L;
        std::vector<double> cuts{s0};
        const long m0 = static_cast<long>(std::floor((s0 - ap.domain.lo) / h));
        for (long m = m0; ; ++m) {
            const double t = ap.domain.lo + m * h;
            if (t >= s1 - 1e-12 * h) break;
            if (t > s0 + 1e-12 * h) cuts.push_back(t);
        }
        cuts.push_back(s1);
        for (std::size_t pc = 0; pc + 1 < cuts.size(); ++pc) {
            const double a = cuts[pc], b = cuts[pc + 1];
            for (int k = 0; k < npg; ++k) {
                trip.emplace_back(i, static_cast<int>(ax.segment_nodes.size()), 0.5 * (b - a) * g.weights[k]);
                ax.segment_nodes.push_back(a + 0.5 * (1.0 + g.nodes[k]) * (b - a));
            }
        }
    }
    SpMat r(nseg, static_cast<int>(ax.segment_nodes.size()));
    r.setFromTriplets(trip.begin(), trip.end());
    ax.segment_reduce = Op1D::sparse(r);
    return ax;
}

void finish_axis(Axis& ax) {
    for (int s = 0; s < 3; ++s)
        for (int f = 0; f < 2; ++f)
            for (int d = 0; d < 2; ++d)
                ax.eval[s][f][d] = Op1D::sparse(collocation_matrix(
                    ax.space(static_cast<Factor>(f)), ax.nodes(static_cast<NodeSet>(s)), d));

    const Eigen::MatrixXd interp = ax.eval[1][0][0].to_dense();
    ax.interp_inv = Op1D::dense(dense_inverse(interp, "interpolation"));
    const Eigen::MatrixXd hist = Eigen::MatrixXd(ax.segment_reduce.sparse_matrix() * ax.eval[2][1][0].sparse_matrix());
    ax.hist_inv = Op1D::dense(dense_inverse(hist, "histopolation"));

    Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(ax.quad_weights.data(), ax.quad_weights.size());
    const SpMat& eh = ax.eval[0][0][0].sparse_matrix();
    const SpMat& el = ax.eval[0][1][0].sparse_matrix();
    ax.mass_high = Eigen::MatrixXd(SpMat(eh.transpose() * w.asDiagonal() * eh));
    ax.mass_low = Eigen::MatrixXd(SpMat(el.transpose() * w.asDiagonal() * el));
    const Eigen::MatrixXd dd = ax.deriv.to_dense();
    ax.stiff_high = dd.transpose() * ax.mass_low * dd;
}

void append_block(std::vector<Eigen::Triplet<double>>& trip, const SpMat& m, int row0, int col0, double scale) {
    for (int k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it)
            trip.emplace_back(row0 + static_cast<int>(it.row()), col0 + static_cast<int>(it.col()), scale * it.value());
}

} // namespace

DeRhamComplex::DeRhamComplex(const ComplexParams& params) : params_(params) {
    int n_active = 0;
    for (int a = 0; a < 3; ++a) {
        const AxisParams& ap = params.axes[a];
        if (ap.active) {
            ++n_active;
            if (ap.cells < 1) throw ConfigError("axis " + std::to_string(a) + ": cells must be positive");
            if (ap.degree < 0) throw ConfigError("axis " + std::to_string(a) + ": degree must be nonnegative");
            if (ap.boundary == Boundary::Periodic && ap.cells <= ap.degree + 1)
                throw ConfigError("axis " + std::to_string(a) + ": periodic axis needs more cells than degree+1");
        }
        if (!(ap.domain.hi > ap.domain.lo))
            throw ConfigError("axis " + std::to_string(a) + ": empty domain");
        axes_.push_back(make_axis(ap, params.n_gauss, params.projection_gauss));
        finish_axis(axes_.back());
    }
    if (n_active == 0) throw ConfigError("complex needs at least one active axis");
    build_layouts();
    build_derivatives();

    const Shape qs = quad_shape();
    quad_weights_.resize(qs.size());
    int idx = 0;
    for (int k = 0; k < qs[2]; ++k)
        for (int j = 0; j < qs[1]; ++j)
            for (int i = 0; i < qs[0]; ++i)
                quad_weights_[idx++] = axes_[0].quad_weights[i] * axes_[1].quad_weights[j] * axes_[2].quad_weights[k];
}

int DeRhamComplex::logical_dim() const {
    int n = 0;
    for (const auto& a : axes_) n += a.active ? 1 : 0;
    return n;
}

void DeRhamComplex::build_layouts() {
    auto make = [&](SpaceTag tag, const std::vector<std::array<Factor, 3>>& pattern) {
        SpaceLayout lay;
        lay.tag = tag;
        int off = 0;
        for (const auto& f : pattern) {
            Block b;
            b.factors = f;
            for (int a = 0; a < 3; ++a) b.shape.n[a] = axes_[a].dim(f[a]);
            b.offset = off;
            off += b.size();
            lay.blocks.push_back(b);
        }
        lay.dim = off;
        layouts_[static_cast<int>(tag)] = lay;
    };
    const Factor H = Factor::High, L = Factor::Low;
    make(SpaceTag::V0, {{H, H, H}});
    make(SpaceTag::V1, {{L, H, H}, {H, L, H}, {H, H, L}});
    make(SpaceTag::V2, {{H, L, L}, {L, H, L}, {L, L, H}});
    make(SpaceTag::V3, {{L, L, L}});
    make(SpaceTag::X, {{H, H, H}, {H, H, H}, {H, H, H}});
}

void DeRhamComplex::build_derivatives() {
    auto dmat = [&](const Block& src, int axis) {
        std::array<const Op1D*, 3> ops{nullptr, nullptr, nullptr};
        ops[axis] = &axes_[axis].deriv;
        return kron_matrix(ops, src.shape);
    };
    const auto& v0 = layout(SpaceTag::V0);
    const auto& v1 = layout(SpaceTag::V1);
    const auto& v2 = layout(SpaceTag::V2);
    const auto& v3 = layout(SpaceTag::V3);

    std::vector<Eigen::Triplet<double>> trip;
    for (int c = 0; c < 3; ++c) append_block(trip, dmat(v0.blocks[0], c), v1.blocks[c].offset, 0, 1.0);
    G_.resize(v1.dim, v0.dim);
    G_.setFromTriplets(trip.begin(), trip.end());

    trip.clear();
    for (int c = 0; c < 3; ++c) {
        const int a = (c + 1) % 3, b = (c + 2) % 3;
        // (curl A)_c = d_a A_b - d_b A_a
        append_block(trip, dmat(v1.blocks[b], a), v2.blocks[c].offset, v1.blocks[b].offset, 1.0);
        append_block(trip, dmat(v1.blocks[a], b), v2.blocks[c].offset, v1.blocks[a].offset, -1.0);
    }
    C_.resize(v2.dim, v1.dim);
    C_.setFromTriplets(trip.begin(), trip.end());

    trip.clear();
    for (int c = 0; c < 3; ++c) append_block(trip, dmat(v2.blocks[c], c), 0, v2.blocks[c].offset, 1.0);
    D_.resize(v3.dim, v2.dim);
    D_.setFromTriplets(trip.begin(), trip.end());
    G_.prune(0.0);
    C_.prune(0.0);
    D_.prune(0.0);
}

namespace {
void check_tag(const Field& f, SpaceTag expected, int dim, const char* op) {
    if (f.tag != expected)
        throw TypeError(std::string(op) + ": expected a field in " + to_string(expected) + ", got " + to_string(f.tag));
    if (f.coeffs.size() != dim) throw TypeError(std::string(op) + ": coefficient vector has the wrong length");
}
} // namespace

Field DeRhamComplex::grad(const Field& f) const {
    check_tag(f, SpaceTag::V0, dim(SpaceTag::V0), "grad");
    return {SpaceTag::V1, G_ * f.coeffs};
}

Field DeRhamComplex::curl(const Field& a) const {
    check_tag(a, SpaceTag::V1, dim(SpaceTag::V1), "curl");
    return {SpaceTag::V2, C_ * a.coeffs};
}

Field DeRhamComplex::div(const Field& b) const {
    check_tag(b, SpaceTag::V2, dim(SpaceTag::V2), "div");
    return {SpaceTag::V3, D_ * b.coeffs};
}

Shape DeRhamComplex::node_shape(const NodeSets& sets) const {
    Shape s;
    for (int a = 0; a < 3; ++a) s.n[a] = static_cast<int>(axes_[a].nodes(sets[a]).size());
    return s;
}

void DeRhamComplex::for_each_node(const NodeSets& sets,
                                  const std::function<void(int, const std::array<double, 3>&)>& f) const {
    const auto& x = axes_[0].nodes(sets[0]);
    const auto& y = axes_[1].nodes(sets[1]);
    const auto& z = axes_[2].nodes(sets[2]);
    int idx = 0;
    for (std::size_t k = 0; k < z.size(); ++k)
        for (std::size_t j = 0; j < y.size(); ++j)
            for (std::size_t i = 0; i < x.size(); ++i) f(idx++, {x[i], y[j], z[k]});
}

Eigen::VectorXd DeRhamComplex::eval_block(const Block& b, const double* coeffs, const NodeSets& sets,
                                          int deriv_axis) const {
    std::array<const Op1D*, 3> ops{};
    for (int a = 0; a < 3; ++a)
        ops[a] = &axes_[a].eval[static_cast<int>(sets[a])][static_cast<int>(b.factors[a])][a == deriv_axis ? 1 : 0];
    Eigen::Map<const Eigen::VectorXd> c(coeffs, b.size());
    return kron_apply(ops, c, b.shape);
}

void DeRhamComplex::eval_block_adjoint(const Block& b, const Eigen::VectorXd& values, const NodeSets& sets,
                                       double* coeffs, int deriv_axis) const {
    std::array<const Op1D*, 3> ops{};
    for (int a = 0; a < 3; ++a)
        ops[a] = &axes_[a].eval[static_cast<int>(sets[a])][static_cast<int>(b.factors[a])][a == deriv_axis ? 1 : 0];
    const Eigen::VectorXd r = kron_apply(ops, values, node_shape(sets), true);
    Eigen::Map<Eigen::VectorXd>(coeffs, b.size()) += r;
}

Eigen::VectorXd DeRhamComplex::project_block(const Block& b, const Eigen::VectorXd& values) const {
    const NodeSets sets = b.dof_nodes();
    std::array<const Op1D*, 3> reduce{};
    std::array<const Op1D*, 3> inv{};
    for (int a = 0; a < 3; ++a) {
        if (sets[a] == NodeSet::Segment) {
            reduce[a] = &axes_[a].segment_reduce;
            inv[a] = &axes_[a].hist_inv;
        } else {
            inv[a] = &axes_[a].interp_inv;
        }
    }
    const Shape s = node_shape(sets);
    const Eigen::VectorXd r = kron_apply(reduce, values, s);
    return kron_apply(inv, r, kron_shape(reduce, s));
}

Eigen::VectorXd DeRhamComplex::project_block_adjoint(const Block& b, const Eigen::VectorXd& coeffs) const {
    const NodeSets sets = b.dof_nodes();
    std::array<const Op1D*, 3> reduce{};
    std::array<const Op1D*, 3> inv{};
    for (int a = 0; a < 3; ++a) {
        if (sets[a] == NodeSet::Segment) {
            reduce[a] = &axes_[a].segment_reduce;
            inv[a] = &axes_[a].hist_inv;
        } else {
            inv[a] = &axes_[a].interp_inv;
        }
    }
    const Eigen::VectorXd r = kron_apply(inv, coeffs, b.shape, true);
    return kron_apply(reduce, r, b.shape, true);
}

Field DeRhamComplex::project_scalar(SpaceTag tag, const ScalarFunction& f) const {
    if (tag != SpaceTag::V0 && tag != SpaceTag::V3)
        throw TypeError(std::string("project_scalar: ") + to_string(tag) + " is not a scalar space");
    const Block& b = layout(tag).blocks[0];
    const NodeSets sets = b.dof_nodes();
    Eigen::VectorXd v(node_shape(sets).size());
    for_each_node(sets, [&](int i, const std::array<double, 3>& x) { v[i] = f(x); });
    return {tag, project_block(b, v)};
}

Field DeRhamComplex::project_vector(SpaceTag tag, const VectorFunction& f) const {
    if (tag == SpaceTag::V0 || tag == SpaceTag::V3)
        throw TypeError(std::string("project_vector: ") + to_string(tag) + " is not a vector space");
    const SpaceLayout& lay = layout(tag);
    Eigen::VectorXd out(lay.dim);
    for (int c = 0; c < 3; ++c) {
        const Block& b = lay.blocks[c];
        const NodeSets sets = b.dof_nodes();
        Eigen::VectorXd v(node_shape(sets).size());
        for_each_node(sets, [&](int i, const std::array<double, 3>& x) { v[i] = f(x)[c]; });
        out.segment(b.offset, b.size()) = project_block(b, v);
    }
    return {tag, out};
}

Field DeRhamComplex::project_k(int k, const ScalarFunction& f) const {
    if (k == 0) return project_scalar(SpaceTag::V0, f);
    if (k == 3) return project_scalar(SpaceTag::V3, f);
    throw TypeError("project_k: scalar data only projects into V0 or V3");
}

Field DeRhamComplex::project_k(int k, const VectorFunction& f) const {
    if (k == 1) return project_vector(SpaceTag::V1, f);
    if (k == 2) return project_vector(SpaceTag::V2, f);
    throw TypeError("project_k: vector data only projects into V1 or V2");
}

Field DeRhamComplex::project_X(const VectorFunction& f) const { return project_vector(SpaceTag::X, f); }

std::array<double, 3> DeRhamComplex::point_value(const Field& f, const std::array<double, 3>& x) const {
    const SpaceLayout& lay = layout(f.tag);
    if (f.coeffs.size() != lay.dim) throw TypeError("point_value: coefficient vector has the wrong length");
    std::array<double, 3> out{0.0, 0.0, 0.0};
    for (std::size_t c = 0; c < lay.blocks.size(); ++c) {
        const Block& b = lay.blocks[c];
        std::array<std::vector<std::pair<int, double>>, 3> bv;
        for (int a = 0; a < 3; ++a) bv[a] = axes_[a].space(b.factors[a]).eval_basis(x[a], 0);
        double s = 0.0;
        for (const auto& [k, wk] : bv[2])
            for (const auto& [j, wj] : bv[1])
                for (const auto& [i, wi] : bv[0])
                    s += wi * wj * wk * f.coeffs[b.offset + i + b.shape[0] * (j + b.shape[1] * k)];
        out[c] = s;
    }
    return out;
}

double DeRhamComplex::min_cell_size() const {
    double h = 1e300;
    for (const auto& a : axes_)
        if (a.active) h = std::min(h, a.high.cell_size());
    return h;
}

std::string DeRhamComplex::describe() const {
    std::ostringstream os;
    for (int a = 0; a < 3; ++a) {
        const auto& ax = axes_[a];
        if (a) os << " x ";
        if (!ax.active) {
            os << "(trivial)";
            continue;
        }
        os << "(p=" << ax.low.degree() << ", " << ax.low.n_cells() << " cells, "
           << (ax.high.boundary() == Boundary::Periodic ? "periodic" : "clamped") << ", ["
           << ax.low.domain().lo << ", " << ax.low.domain().hi << "])";
    }
    return os.str();
}

DeRhamComplex build_complex(const ComplexParams& params) { return DeRhamComplex(params); }

} // namespace vrmhd
