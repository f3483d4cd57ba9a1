#include "vrmhd/splines.hpp"

#include <algorithm>
#include <cmath>

#include "vrmhd/errors.hpp"

namespace vrmhd {

GaussRule gauss_legendre(int n) {
    if (n < 1) throw ConfigError("gauss_legendre: need at least one node");
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double pi = std::acos(-1.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 1.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * x * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (x * p1 - p2) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) {
                if (it > 0) break;
            }
        }
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

namespace {

int periodic_shift(int degree) { return (degree + 1) / 2; }

} // namespace

SplineSpace1D::SplineSpace1D(int degree, int n_cells, Boundary boundary, Interval domain)
    : degree_(degree), n_cells_(n_cells), boundary_(boundary), domain_(domain) {
    if (degree < 0) throw ConfigError("spline degree must be nonnegative");
    if (n_cells < 1) throw ConfigError("spline space needs at least one cell");
    if (!(domain.hi > domain.lo)) throw ConfigError("spline domain must have positive length");
    if (boundary == Boundary::Periodic && n_cells <= degree && !(degree == 0 && n_cells == 1))
        throw ConfigError("periodic spline space requires n_cells > degree");
    h_ = domain.length() / n_cells;

    const int p = degree;
    const double a = domain.lo;
    if (boundary == Boundary::Periodic) {
        knots_.resize(n_cells + 2 * p + 1);
        for (int i = 0; i < static_cast<int>(knots_.size()); ++i) knots_[i] = a + (i - p) * h_;
        greville_.resize(n_cells);
        const int s = periodic_shift(p);
        for (int j = 0; j < n_cells; ++j) greville_[j] = a + (j - s + 0.5 * (p + 1)) * h_;
    } else {
        knots_.assign(n_cells + 2 * p + 1, 0.0);
        for (int i = 0; i <= p; ++i) {
            knots_[i] = a;
            knots_[n_cells + p + i] = domain.hi;
        }
        for (int i = 1; i < n_cells; ++i) knots_[p + i] = a + i * h_;
        const int dim = n_cells + p;
        greville_.resize(dim);
        if (p == 0) {
            for (int j = 0; j < dim; ++j) greville_[j] = a + (j + 0.5) * h_;
        } else {
            for (int j = 0; j < dim; ++j) {
                double sum = 0.0;
                for (int k = 1; k <= p; ++k) sum += knots_[j + k];
                greville_[j] = sum / p;
            }
        }
    }
}

double SplineSpace1D::wrap(double x) const {
    if (boundary_ != Boundary::Periodic) return x;
    const double L = domain_.length();
    double y = std::fmod(x - domain_.lo, L);
    if (y < 0) y += L;
    if (y >= L) y -= L;
    return domain_.lo + y;
}

int SplineSpace1D::cell_of(double x) const {
    const double y = wrap(x);
    if (boundary_ == Boundary::Clamped) {
        const double tol = 1e-12 * domain_.length();
        if (y < domain_.lo - tol || y > domain_.hi + tol)
            throw DomainError("point " + std::to_string(x) + " outside the spline domain");
    }
    int c = static_cast<int>(std::floor((y - domain_.lo) / h_));
    return std::clamp(c, 0, n_cells_ - 1);
}

int SplineSpace1D::global_index(int cell, int r) const {
    if (boundary_ == Boundary::Clamped) return cell + r;
    const int n = n_cells_;
    int j = (cell + r - degree_ + periodic_shift(degree_)) % n;
    if (j < 0) j += n;
    return j;
}

// Cox-de Boor on the (extended) knot vector: the q+1 functions of degree q
// that are nonzero on the cell. Only the knots around the span are used, so
// the same knot vector serves every q <= degree.
void SplineSpace1D::basis_in_cell(int cell, double x, int q, double* values) const {
    const int span = cell + degree_;
    const double* t = knots_.data();
    double left[16], right[16];
    values[0] = 1.0;
    for (int j = 1; j <= q; ++j) {
        left[j] = x - t[span + 1 - j];
        right[j] = t[span + j] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double den = right[r + 1] + left[j - r];
            const double tmp = den != 0.0 ? values[r] / den : 0.0;
            values[r] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        values[j] = saved;
    }
}

void SplineSpace1D::eval(double x, int deriv_order, int* indices, double* values) const {
    const int p = degree_;
    const int cell = cell_of(x);
    const double y = std::clamp(wrap(x), domain_.lo, domain_.hi);
    for (int r = 0; r <= p; ++r) indices[r] = global_index(cell, r);
    if (deriv_order == 0) {
        basis_in_cell(cell, y, p, values);
        return;
    }
    if (deriv_order != 1) throw ConfigError("only first derivatives of splines are supported");
    if (p == 0) {
        values[0] = 0.0;
        return;
    }
    double low[16];
    basis_in_cell(cell, y, p - 1, low);
    const int span = cell + p;
    const double* t = knots_.data();
    for (int r = 0; r <= p; ++r) {
        const int i = span - p + r;
        double v = 0.0;
        if (r >= 1) {
            const double den = t[i + p] - t[i];
            if (den != 0.0) v += low[r - 1] / den;
        }
        if (r <= p - 1) {
            const double den = t[i + p + 1] - t[i + 1];
            if (den != 0.0) v -= low[r] / den;
        }
        values[r] = p * v;
    }
}

std::vector<std::pair<int, double>> SplineSpace1D::eval_basis(double x, int deriv_order) const {
    int idx[16];
    double val[16];
    eval(x, deriv_order, idx, val);
    std::vector<std::pair<int, double>> out;
    out.reserve(degree_ + 1);
    for (int r = 0; r <= degree_; ++r) out.emplace_back(idx[r], val[r]);
    return out;
}

double SplineSpace1D::eval_spline(const Eigen::VectorXd& coeffs, double x, int deriv_order) const {
    if (coeffs.size() != dimension()) throw TypeError("coefficient vector does not match the spline space");
    int idx[16];
    double val[16];
    eval(x, deriv_order, idx, val);
    double s = 0.0;
    for (int r = 0; r <= degree_; ++r) s += coeffs[idx[r]] * val[r];
    return s;
}

QuadratureGrid SplineSpace1D::quadrature(int n_gauss) const {
    const GaussRule g = gauss_legendre(n_gauss);
    QuadratureGrid q;
    q.nodes.resize(n_cells_, n_gauss);
    q.weights.resize(n_cells_, n_gauss);
    for (int c = 0; c < n_cells_; ++c) {
        const double x0 = domain_.lo + c * h_;
        for (int k = 0; k < n_gauss; ++k) {
            q.nodes(c, k) = x0 + 0.5 * (1.0 + g.nodes[k]) * h_;
            q.weights(c, k) = 0.5 * g.weights[k] * h_;
        }
    }
    return q;
}

SpMat collocation_matrix(const SplineSpace1D& space, const std::vector<double>& points, int deriv_order) {
    const int p = space.degree();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(points.size() * (p + 1));
    int idx[16];
    double val[16];
    for (std::size_t i = 0; i < points.size(); ++i) {
        space.eval(points[i], deriv_order, idx, val);
        for (int r = 0; r <= p; ++r)
            if (val[r] != 0.0) trip.emplace_back(static_cast<int>(i), idx[r], val[r]);
    }
    SpMat m(static_cast<int>(points.size()), space.dimension());
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

SpMat derivative_matrix(const SplineSpace1D& high, const SplineSpace1D& low) {
    if (high.degree() != low.degree() + 1 || high.n_cells() != low.n_cells() ||
        high.boundary() != low.boundary())
        throw ConfigError("derivative_matrix: incompatible spline spaces");
    const int nh = high.dimension();
    const int nl = low.dimension();
    std::vector<Eigen::Triplet<double>> trip;
    if (high.boundary() == Boundary::Periodic) {
        const int n = high.n_cells();
        const double inv_h = 1.0 / high.cell_size();
        const int shift = (high.degree() + 1) / 2 - (low.degree() + 1) / 2;
        for (int j = 0; j < nh; ++j) {
            const int k = ((j - shift) % n + n) % n;
            trip.emplace_back(k, j, inv_h);
            trip.emplace_back((k + 1) % n, j, -inv_h);
        }
    } else {
        const auto& t = high.knots();
        const int p1 = high.degree();
        for (int k = 0; k < nl; ++k) {
            const double w = p1 / (t[k + p1 + 1] - t[k + 1]);
            trip.emplace_back(k, k + 1, w);
            trip.emplace_back(k, k, -w);
        }
    }
    SpMat d(nl, nh);
    d.setFromTriplets(trip.begin(), trip.end());
    return d;
}

SplineSpace1D build_space(int degree, int n_cells, Boundary boundary, Interval domain) {
    if (degree > 12) throw ConfigError("spline degree above 12 is not supported");
    return SplineSpace1D(degree, n_cells, boundary, domain);
}

} // namespace vrmhd
