#include "vrmhd/integrators.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include "vrmhd/errors.hpp"

namespace vrmhd {

using Eigen::VectorXd;

namespace {

const NodeSets kPoints{NodeSet::Point, NodeSet::Point, NodeSet::Point};

double inf_norm(const VectorXd& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

double weighted_mean(const VectorXd& f, const VectorXd& w) { return f.dot(w) / w.sum(); }

class Timer {
public:
    Timer() : t0_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

private:
    std::chrono::steady_clock::time_point t0_;
};

} // namespace

// ---------------------------------------------------------------------------
// SplitOperators

SplitOperators::SplitOperators(const Galerkin& gk) : gk_(gk), cx_(gk.complex()) {}

SplitOperators::ScalarAtFaces SplitOperators::sample_faces(const VectorXd& f) const {
    const Block& b3 = cx_.layout(SpaceTag::V3).blocks[0];
    const SpaceLayout& v2 = cx_.layout(SpaceTag::V2);
    ScalarAtFaces out;
    for (int c = 0; c < 3; ++c) out.v[c] = cx_.eval_block(b3, f.data(), v2.blocks[c].dof_nodes());
    return out;
}

SplitOperators::FieldAtEdges SplitOperators::sample_edges(const VectorXd& B) const {
    const SpaceLayout& v1 = cx_.layout(SpaceTag::V1);
    const SpaceLayout& v2 = cx_.layout(SpaceTag::V2);
    FieldAtEdges out;
    for (int c = 0; c < 3; ++c) {
        const NodeSets sets = v1.blocks[c].dof_nodes();
        for (int a = 0; a < 3; ++a) out.v[c][a] = cx_.eval_block(v2.blocks[a], B.data() + v2.blocks[a].offset, sets);
    }
    return out;
}

VectorXd SplitOperators::flux(const ScalarAtFaces& f, const VectorXd& v) const {
    const SpaceLayout& v2 = cx_.layout(SpaceTag::V2);
    const SpaceLayout& x = cx_.layout(SpaceTag::X);
    VectorXd out(v2.dim);
    for (int c = 0; c < 3; ++c) {
        const Block& b = v2.blocks[c];
        VectorXd vals = cx_.eval_block(x.blocks[c], v.data() + x.blocks[c].offset, b.dof_nodes());
        vals.array() *= f.v[c].array();
        out.segment(b.offset, b.size()) = cx_.project_block(b, vals);
    }
    return out;
}

VectorXd SplitOperators::flux_adjoint(const ScalarAtFaces& f, const VectorXd& z) const {
    const SpaceLayout& v2 = cx_.layout(SpaceTag::V2);
    const SpaceLayout& x = cx_.layout(SpaceTag::X);
    VectorXd out = VectorXd::Zero(x.dim);
    for (int c = 0; c < 3; ++c) {
        const Block& b = v2.blocks[c];
        VectorXd vals = cx_.project_block_adjoint(b, z.segment(b.offset, b.size()));
        vals.array() *= f.v[c].array();
        cx_.eval_block_adjoint(x.blocks[c], vals, b.dof_nodes(), out.data() + x.blocks[c].offset);
    }
    return out;
}

VectorXd SplitOperators::A(const ScalarAtFaces& f, const VectorXd& v) const { return cx_.D() * flux(f, v); }

VectorXd SplitOperators::A_adjoint(const ScalarAtFaces& f, const VectorXd& y) const {
    const VectorXd z = cx_.D().transpose() * y;
    return flux_adjoint(f, z);
}

VectorXd SplitOperators::emf(const FieldAtEdges& B, const VectorXd& v) const {
    const SpaceLayout& v1 = cx_.layout(SpaceTag::V1);
    const SpaceLayout& x = cx_.layout(SpaceTag::X);
    VectorXd out(v1.dim);
    for (int c = 0; c < 3; ++c) {
        const int a = (c + 1) % 3, b = (c + 2) % 3;
        const Block& blk = v1.blocks[c];
        const NodeSets sets = blk.dof_nodes();
        const VectorXd va = cx_.eval_block(x.blocks[a], v.data() + x.blocks[a].offset, sets);
        const VectorXd vb = cx_.eval_block(x.blocks[b], v.data() + x.blocks[b].offset, sets);
        const VectorXd vals = B.v[c][a].cwiseProduct(vb) - B.v[c][b].cwiseProduct(va);
        out.segment(blk.offset, blk.size()) = cx_.project_block(blk, vals);
    }
    return out;
}

VectorXd SplitOperators::emf_adjoint(const FieldAtEdges& B, const VectorXd& z) const {
    const SpaceLayout& v1 = cx_.layout(SpaceTag::V1);
    const SpaceLayout& x = cx_.layout(SpaceTag::X);
    VectorXd out = VectorXd::Zero(x.dim);
    for (int c = 0; c < 3; ++c) {
        const int a = (c + 1) % 3, b = (c + 2) % 3;
        const Block& blk = v1.blocks[c];
        const NodeSets sets = blk.dof_nodes();
        const VectorXd val = cx_.project_block_adjoint(blk, z.segment(blk.offset, blk.size()));
        cx_.eval_block_adjoint(x.blocks[b], B.v[c][a].cwiseProduct(val), sets, out.data() + x.blocks[b].offset);
        cx_.eval_block_adjoint(x.blocks[a], -B.v[c][b].cwiseProduct(val), sets, out.data() + x.blocks[a].offset);
    }
    return out;
}

VectorXd SplitOperators::K(const FieldAtEdges& B, const VectorXd& v) const { return cx_.C() * emf(B, v); }

VectorXd SplitOperators::K_adjoint(const FieldAtEdges& B, const VectorXd& y) const {
    const VectorXd z = cx_.C().transpose() * y;
    return emf_adjoint(B, z);
}

VectorXd SplitOperators::bracket(const VectorXd& a, const VectorXd& v) const {
    const SpaceLayout& x = cx_.layout(SpaceTag::X);
    std::array<VectorXd, 3> av;
    for (int d = 0; d < 3; ++d) av[d] = cx_.eval_block(x.blocks[d], a.data() + x.blocks[d].offset, kPoints);
    std::array<VectorXd, 3> vv;
    for (int d = 0; d < 3; ++d) vv[d] = cx_.eval_block(x.blocks[d], v.data() + x.blocks[d].offset, kPoints);
    VectorXd out(x.dim);
    for (int c = 0; c < 3; ++c) {
        const Block& b = x.blocks[c];
        VectorXd vals = VectorXd::Zero(av[0].size());
        for (int d = 0; d < 3; ++d) {
            if (!cx_.axis(d).active) continue;
            const VectorXd dv = cx_.eval_block(b, v.data() + b.offset, kPoints, d);
            const VectorXd da = cx_.eval_block(b, a.data() + b.offset, kPoints, d);
            vals.array() += av[d].array() * dv.array() - vv[d].array() * da.array();
        }
        out.segment(b.offset, b.size()) = cx_.project_block(b, vals);
    }
    return out;
}

VectorXd SplitOperators::bracket_adjoint(const VectorXd& a, const VectorXd& m) const {
    const SpaceLayout& x = cx_.layout(SpaceTag::X);
    std::array<VectorXd, 3> av, y;
    for (int d = 0; d < 3; ++d) {
        const Block& b = x.blocks[d];
        av[d] = cx_.eval_block(b, a.data() + b.offset, kPoints);
        y[d] = cx_.project_block_adjoint(b, m.segment(b.offset, b.size()));
    }
    VectorXd out = VectorXd::Zero(x.dim);
    for (int d = 0; d < 3; ++d) {
        if (!cx_.axis(d).active) continue;
        VectorXd w = VectorXd::Zero(av[0].size());
        for (int c = 0; c < 3; ++c) {
            const Block& b = x.blocks[c];
            // a_d d_d v_c
            cx_.eval_block_adjoint(b, y[c].cwiseProduct(av[d]), kPoints, out.data() + b.offset, d);
            // - v_d d_d a_c
            const VectorXd da = cx_.eval_block(b, a.data() + b.offset, kPoints, d);
            w.array() -= y[c].array() * da.array();
        }
        const Block& bd = x.blocks[d];
        cx_.eval_block_adjoint(bd, w, kPoints, out.data() + bd.offset);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Integrator

void StepTimings::add(const std::string& name, double sec, long iters) {
    seconds[name] += sec;
    calls[name] += 1;
    iterations[name] += iters;
}

struct Integrator::Convergence {
    double tol;
    double floor;
    bool done(double inc, double scale) const { return inc <= tol * scale || inc <= floor; }
};

Integrator::Integrator(const Galerkin& gk, Eos eos) : gk_(gk), cx_(gk.complex()), eos_(eos), ops_(gk) {}

VectorXd Integrator::positive_density(const VectorXd& rho) const {
    VectorXd q = gk_.eval_quad(SpaceTag::V3, rho, 0);
    if (!q.allFinite()) throw StateError("density is not finite");
    const double mn = q.minCoeff();
    if (!(mn > 0.0)) throw StateError("density not positive at a quadrature node (min " + std::to_string(mn) + ")");
    return q;
}

VectorXd Integrator::rho_e_quad(const VectorXd& rho, const VectorXd& s) const {
    const VectorXd rq = positive_density(rho);
    const VectorXd sq = gk_.eval_quad(SpaceTag::V3, s, 0);
    VectorXd out(rq.size());
    for (int i = 0; i < rq.size(); ++i) out[i] = eos_.rho_e(rq[i], sq[i]);
    return out;
}

namespace {

// Pointwise u.v at the quadrature nodes.
VectorXd dot_quad(const Galerkin& gk, const std::array<VectorXd, 3>& a, const VectorXd& v) {
    VectorXd out = VectorXd::Zero(gk.quad_size());
    for (int c = 0; c < 3; ++c) out.array() += a[c].array() * gk.eval_quad(SpaceTag::X, v, c).array();
    return out;
}

std::array<VectorXd, 3> sample_X(const Galerkin& gk, const VectorXd& u) {
    std::array<VectorXd, 3> out;
    for (int c = 0; c < 3; ++c) out[c] = gk.eval_quad(SpaceTag::X, u, c);
    return out;
}

} // namespace

State Integrator::step_m(const State& st, const StepConfig& cfg, Anchor anchor) {
    Timer timer;
    const double dt = cfg.dt;
    const BoundaryMask& mask = gk_.velocity_mask();
    const VectorXd rho_q = positive_density(st.rho.coeffs);
    const VectorXd& u0 = st.u.coeffs;
    const VectorXd m0 = gk_.weighted_apply(SpaceTag::X, rho_q, u0);
    PcgOptions po;
    po.tol = cfg.linear_tol;

    VectorXd u1 = u0;
    VectorXd delta = VectorXd::Zero(u0.size());
    const Convergence conv{cfg.picard_tol, 0.0};
    int it = 0;
    for (;;) {
        ++it;
        const VectorXd m_ref = anchor == Anchor::Start ? m0 : gk_.weighted_apply(SpaceTag::X, rho_q, u1);
        const VectorXd a = 0.5 * (u0 + u1);
        VectorXd rhs = dt * ops_.bracket_adjoint(a, m_ref);
        VectorXd d_new = delta;
        gk_.weighted_solve(SpaceTag::X, rho_q, rhs, d_new, &mask, po);
        const double inc = inf_norm(d_new - delta);
        delta = d_new;
        u1 = u0 + delta;
        if (conv.done(inc, std::max(inf_norm(u1), inf_norm(u0)))) break;
        if (it >= cfg.picard_max_iters) throw NumericalError("momentum step did not converge", it, inc);
    }
    State out = st;
    out.u.coeffs = u1;
    timings_.add("m", timer.seconds(), it);
    return out;
}

State Integrator::step_rho(const State& st, const StepConfig& cfg, Anchor anchor) {
    Timer timer;
    const double dt = cfg.dt;
    const BoundaryMask& mask = gk_.velocity_mask();
    const VectorXd& u0 = st.u.coeffs;
    const VectorXd& rho0 = st.rho.coeffs;
    const VectorXd rho0_q = positive_density(rho0);
    const VectorXd s0_q = gk_.eval_quad(SpaceTag::V3, st.s.coeffs, 0);
    const VectorXd m0 = gk_.weighted_apply(SpaceTag::X, rho0_q, u0);
    const std::array<VectorXd, 3> u0_q = sample_X(gk_, u0);
    const VectorXd& W = gk_.weights();
    const int nq = gk_.quad_size();

    double c2 = 0.0;
    for (int i = 0; i < nq; ++i) c2 = std::max(c2, eos_.gamma() * eos_.pressure(rho0_q[i], s0_q[i]) / rho0_q[i]);
    const Convergence conv{cfg.picard_tol, 1e-14 * std::sqrt(c2)};

    SplitOperators::ScalarAtFaces faces = ops_.sample_faces(rho0);
    VectorXd rho_ref_q = rho0_q;
    VectorXd u1 = u0;
    VectorXd rho1 = rho0;
    VectorXd rho1_prev = rho0;
    PcgOptions po;
    po.tol = 1e-10;
    long lin_iters = 0;
    int it = 0;
    for (;;) {
        ++it;
        if (anchor == Anchor::End && it > 1) {
            faces = ops_.sample_faces(rho1);
            rho_ref_q = positive_density(rho1);
        }
        rho1_prev = rho1;
        const VectorXd uh = 0.5 * (u0 + u1);
        rho1 = rho0 - dt * ops_.A(faces, uh);
        const VectorXd rho1_q = positive_density(rho1);

        VectorXd f = 0.5 * dot_quad(gk_, u0_q, u1);
        VectorXd d(nq);
        double ad = 0.0;
        for (int i = 0; i < nq; ++i) {
            f[i] -= eos_.dq_rho(rho0_q[i], rho1_q[i], s0_q[i]);
            d[i] = 0.5 * eos_.d2rho_e(0.5 * (rho0_q[i] + rho1_q[i]), s0_q[i]);
            ad += W[i] * d[i] * rho_ref_q[i] * rho_ref_q[i];
        }
        ad /= W.sum();
        VectorXd F = gk_.weighted_apply(SpaceTag::X, rho1_q, u1) - m0 + dt * ops_.A_adjoint(faces, gk_.load_3(f));
        mask.apply(F);

        auto J = [&](const VectorXd& v) -> VectorXd {
            VectorXd vm = v;
            mask.apply(vm);
            const VectorXd av = gk_.eval_quad(SpaceTag::V3, ops_.A(faces, vm), 0);
            VectorXd r = gk_.weighted_apply(SpaceTag::X, rho1_q, vm) +
                         (0.5 * dt * dt) * ops_.A_adjoint(faces, gk_.load_3(d.cwiseProduct(av)));
            mask.apply(r);
            return r;
        };
        const double beta = weighted_mean(rho1_q, W);
        const double alpha = 0.5 * dt * dt * ad;
        auto P = [&](const VectorXd& r) -> VectorXd {
            VectorXd z(r.size());
            const SpaceLayout& x = cx_.layout(SpaceTag::X);
            for (int c = 0; c < 3; ++c) {
                std::array<double, 3> al{0.0, 0.0, 0.0};
                al[c] = alpha;
                const Block& b = x.blocks[c];
                z.segment(b.offset, b.size()) = gk_.fast_diag_solve(r.segment(b.offset, b.size()), beta, al);
            }
            return z;
        };
        VectorXd delta = VectorXd::Zero(u1.size());
        lin_iters += pcg(J, P, -F, delta, po).iterations;
        u1 += delta;
        const double inc = inf_norm(delta);
        bool done = conv.done(inc, std::max(inf_norm(u1), inf_norm(u0)));
        if (anchor == Anchor::End)
            done = done && inf_norm(rho1 - rho1_prev) <= cfg.picard_tol * inf_norm(rho1);
        if (done) break;
        if (it >= cfg.picard_max_iters) throw NumericalError("density step did not converge", it, inc);
    }
    rho1 = rho0 - dt * ops_.A(faces, 0.5 * (u0 + u1));
    positive_density(rho1);
    State out = st;
    out.u.coeffs = u1;
    out.rho.coeffs = rho1;
    timings_.add("rho", timer.seconds(), it);
    timings_.add("rho.linear", 0.0, lin_iters);
    return out;
}

State Integrator::step_s(const State& st, const StepConfig& cfg, Anchor anchor) {
    Timer timer;
    const double dt = cfg.dt;
    const BoundaryMask& mask = gk_.velocity_mask();
    const VectorXd& u0 = st.u.coeffs;
    const VectorXd& s0 = st.s.coeffs;
    const VectorXd rho0_q = positive_density(st.rho.coeffs);
    const VectorXd s0_q = gk_.eval_quad(SpaceTag::V3, s0, 0);
    const VectorXd& W = gk_.weights();
    const int nq = gk_.quad_size();

    double c2 = 0.0;
    for (int i = 0; i < nq; ++i) c2 = std::max(c2, eos_.gamma() * eos_.pressure(rho0_q[i], s0_q[i]) / rho0_q[i]);
    const Convergence conv{cfg.picard_tol, 1e-14 * std::sqrt(c2)};

    SplitOperators::ScalarAtFaces faces = ops_.sample_faces(s0);
    VectorXd s_ref_q = s0_q;
    VectorXd u1 = u0;
    VectorXd s1 = s0;
    VectorXd s1_prev = s0;
    PcgOptions po;
    po.tol = 1e-10;
    long lin_iters = 0;
    int it = 0;
    for (;;) {
        ++it;
        if (anchor == Anchor::End && it > 1) {
            faces = ops_.sample_faces(s1);
            s_ref_q = gk_.eval_quad(SpaceTag::V3, s1, 0);
        }
        s1_prev = s1;
        s1 = s0 - dt * ops_.A(faces, 0.5 * (u0 + u1));
        const VectorXd s1_q = gk_.eval_quad(SpaceTag::V3, s1, 0);
        VectorXd g(nq), d(nq);
        double ad = 0.0;
        for (int i = 0; i < nq; ++i) {
            g[i] = eos_.dq_s(rho0_q[i], s0_q[i], s1_q[i]);
            d[i] = 0.5 * eos_.d2s_e(rho0_q[i], 0.5 * (s0_q[i] + s1_q[i]));
            ad += W[i] * d[i] * s_ref_q[i] * s_ref_q[i];
        }
        ad /= W.sum();
        VectorXd F = gk_.weighted_apply(SpaceTag::X, rho0_q, u1 - u0) - dt * ops_.A_adjoint(faces, gk_.load_3(g));
        mask.apply(F);
        auto J = [&](const VectorXd& v) -> VectorXd {
            VectorXd vm = v;
            mask.apply(vm);
            const VectorXd av = gk_.eval_quad(SpaceTag::V3, ops_.A(faces, vm), 0);
            VectorXd r = gk_.weighted_apply(SpaceTag::X, rho0_q, vm) +
                         (0.5 * dt * dt) * ops_.A_adjoint(faces, gk_.load_3(d.cwiseProduct(av)));
            mask.apply(r);
            return r;
        };
        const double beta = weighted_mean(rho0_q, W);
        const double alpha = 0.5 * dt * dt * ad;
        auto P = [&](const VectorXd& r) -> VectorXd {
            VectorXd z(r.size());
            const SpaceLayout& x = cx_.layout(SpaceTag::X);
            for (int c = 0; c < 3; ++c) {
                std::array<double, 3> al{0.0, 0.0, 0.0};
                al[c] = alpha;
                const Block& b = x.blocks[c];
                z.segment(b.offset, b.size()) = gk_.fast_diag_solve(r.segment(b.offset, b.size()), beta, al);
            }
            return z;
        };
        VectorXd delta = VectorXd::Zero(u1.size());
        lin_iters += pcg(J, P, -F, delta, po).iterations;
        u1 += delta;
        const double inc = inf_norm(delta);
        bool done = conv.done(inc, std::max(inf_norm(u1), inf_norm(u0)));
        if (anchor == Anchor::End)
            done = done && inf_norm(s1 - s1_prev) <= cfg.picard_tol * std::max(inf_norm(s1), 1e-300);
        if (done) break;
        if (it >= cfg.picard_max_iters) throw NumericalError("entropy step did not converge", it, inc);
    }
    s1 = s0 - dt * ops_.A(faces, 0.5 * (u0 + u1));
    State out = st;
    out.u.coeffs = u1;
    out.s.coeffs = s1;
    timings_.add("s", timer.seconds(), it);
    timings_.add("s.linear", 0.0, lin_iters);
    return out;
}

State Integrator::step_B(const State& st, const StepConfig& cfg, Anchor anchor) {
    Timer timer;
    const double dt = cfg.dt;
    const BoundaryMask& mask = gk_.velocity_mask();
    const VectorXd& u0 = st.u.coeffs;
    const VectorXd& B0 = st.B.coeffs;
    const VectorXd rho0_q = positive_density(st.rho.coeffs);
    const VectorXd& W = gk_.weights();
    const VectorXd M2B0 = gk_.mass_apply(SpaceTag::V2, B0);
    const double beta = weighted_mean(rho0_q, W);
    PcgOptions po;
    po.tol = cfg.linear_tol;

    VectorXd B_ref = B0;
    VectorXd u1 = u0, B1 = B0;
    VectorXd delta = VectorXd::Zero(u0.size());
    long lin_iters = 0;
    int it = 0;
    for (;;) {
        ++it;
        const SplitOperators::FieldAtEdges edges = ops_.sample_edges(B_ref);
        double b2 = 0.0;
        for (int c = 0; c < 3; ++c) b2 += weighted_mean(gk_.eval_quad(SpaceTag::V2, B_ref, c).array().square().matrix(), W);
        const double alpha = 0.25 * dt * dt * b2;
        auto S = [&](const VectorXd& v) -> VectorXd {
            VectorXd vm = v;
            mask.apply(vm);
            VectorXd r = gk_.weighted_apply(SpaceTag::X, rho0_q, vm) +
                         (0.25 * dt * dt) * ops_.K_adjoint(edges, gk_.mass_apply(SpaceTag::V2, ops_.K(edges, vm)));
            mask.apply(r);
            return r;
        };
        auto P = [&](const VectorXd& r) -> VectorXd {
            VectorXd z(r.size());
            const SpaceLayout& x = cx_.layout(SpaceTag::X);
            for (int c = 0; c < 3; ++c) {
                std::array<double, 3> al{0.0, 0.0, 0.0};
                al[c] = alpha;
                const Block& b = x.blocks[c];
                z.segment(b.offset, b.size()) = gk_.fast_diag_solve(r.segment(b.offset, b.size()), beta, al);
            }
            return z;
        };
        VectorXd rhs = dt * ops_.K_adjoint(edges, M2B0) -
                       (0.5 * dt * dt) * ops_.K_adjoint(edges, gk_.mass_apply(SpaceTag::V2, ops_.K(edges, u0)));
        mask.apply(rhs);
        lin_iters += pcg(S, P, rhs, delta, po).iterations;
        u1 = u0 + delta;
        B1 = B0 - dt * ops_.K(edges, 0.5 * (u0 + u1));
        if (anchor == Anchor::Start) break;
        const double inc = inf_norm(B1 - B_ref);
        if (inc <= cfg.picard_tol * std::max(inf_norm(B1), 1e-300)) break;
        if (it >= cfg.picard_max_iters) throw NumericalError("induction step did not converge", it, inc);
        B_ref = B1;
    }
    State out = st;
    out.u.coeffs = u1;
    out.B.coeffs = B1;
    timings_.add("B", timer.seconds(), it);
    timings_.add("B.linear", 0.0, lin_iters);
    return out;
}

VectorXd Integrator::entropy_update(const VectorXd& rho_q, const VectorXd& s0, const VectorXd& heat, double dt,
                                    const StepConfig& cfg, long& iters) {
    const VectorXd s0_q = gk_.eval_quad(SpaceTag::V3, s0, 0);
    const VectorXd l = dt * gk_.load_3(heat);
    VectorXd ds = VectorXd::Zero(s0.size());
    PcgOptions po;
    po.tol = cfg.linear_tol;
    const int nq = gk_.quad_size();
    const double s_scale = inf_norm(s0);
    for (int it = 1;; ++it) {
        const VectorXd ds_q = gk_.eval_quad(SpaceTag::V3, ds, 0);
        VectorXd w(nq);
        for (int i = 0; i < nq; ++i) w[i] = eos_.dq_s(rho_q[i], s0_q[i], s0_q[i] + ds_q[i]);
        VectorXd d_new = ds;
        gk_.weighted_solve(SpaceTag::V3, w, l, d_new, nullptr, po);
        const double inc = inf_norm(d_new - ds);
        ds = d_new;
        ++iters;
        if (inc <= cfg.picard_tol * inf_norm(ds) || inc <= 1e-15 * s_scale) break;
        if (it >= cfg.picard_max_iters) throw NumericalError("entropy heating did not converge", it, inc);
    }
    return s0 + ds;
}

State Integrator::step_visc(const State& st, const StepConfig& cfg) {
    return step_visc(st, cfg, viscosity_weight(gk_, cfg.mu, st.u.coeffs));
}

State Integrator::step_visc(const State& st, const StepConfig& cfg, const WeightFunction& mu) {
    if (mu.size() != gk_.quad_size()) throw TypeError("viscosity weight does not live on the quadrature grid");
    if (mu.minCoeff() < 0.0) throw ConfigError("viscosity must be nonnegative");
    if (mu.maxCoeff() == 0.0) return st;
    Timer timer;
    const double dt = cfg.dt;
    const BoundaryMask& mask = gk_.velocity_mask();
    const VectorXd& u0 = st.u.coeffs;
    const VectorXd rho0_q = positive_density(st.rho.coeffs);
    const VectorXd& W = gk_.weights();
    const double beta = weighted_mean(rho0_q, W);
    const double mbar = weighted_mean(mu, W);
    std::array<double, 3> al{};
    for (int a = 0; a < 3; ++a) al[a] = cx_.axis(a).active ? dt * mbar : 0.0;

    auto Aop = [&](const VectorXd& v) -> VectorXd {
        VectorXd vm = v;
        mask.apply(vm);
        VectorXd r = gk_.weighted_apply(SpaceTag::X, rho0_q, vm) + dt * gk_.stiffness_X(mu, vm);
        mask.apply(r);
        return r;
    };
    auto P = [&](const VectorXd& r) -> VectorXd {
        VectorXd z(r.size());
        const SpaceLayout& x = cx_.layout(SpaceTag::X);
        for (int c = 0; c < 3; ++c) {
            const Block& b = x.blocks[c];
            z.segment(b.offset, b.size()) = gk_.fast_diag_solve(r.segment(b.offset, b.size()), beta, al);
        }
        return z;
    };
    VectorXd rhs = -dt * gk_.stiffness_X(mu, u0);
    mask.apply(rhs);
    VectorXd delta = VectorXd::Zero(u0.size());
    PcgOptions po;
    po.tol = cfg.linear_tol;
    long iters = pcg(Aop, P, rhs, delta, po).iterations;
    const VectorXd u1 = u0 + delta;
    const VectorXd uh = u0 + 0.5 * delta;

    VectorXd heat = VectorXd::Zero(gk_.quad_size());
    for (int c = 0; c < 3; ++c)
        for (int d = 0; d < 3; ++d) {
            if (!cx_.axis(d).active) continue;
            heat.array() += gk_.eval_quad(SpaceTag::X, uh, c, d).array() * gk_.eval_quad(SpaceTag::X, u1, c, d).array();
        }
    heat.array() *= mu.array();
    State out = st;
    out.u.coeffs = u1;
    out.s.coeffs = entropy_update(rho0_q, st.s.coeffs, heat, dt, cfg, iters);
    timings_.add("visc", timer.seconds(), iters);
    return out;
}

State Integrator::step_res(const State& st, const StepConfig& cfg) {
    const WeightFunction eta = resistivity_weight(gk_, cfg.eta, st.B.coeffs);
    return step_res(st, cfg, eta, cfg.eta.mode == DissipationSpec::Mode::Constant, nullptr);
}

State Integrator::step_res_linearized(const State& st, const StepConfig& cfg) {
    if (!cfg.linearized_B0) throw ConfigError("linearized resistive step needs a reference field");
    const WeightFunction eta = resistivity_weight(gk_, cfg.eta, st.B.coeffs);
    return step_res(st, cfg, eta, cfg.eta.mode == DissipationSpec::Mode::Constant, &*cfg.linearized_B0);
}

State Integrator::step_res(const State& st, const StepConfig& cfg, const WeightFunction& eta, bool constant_eta,
                           const VectorXd* Bref) {
    if (eta.size() != gk_.quad_size()) throw TypeError("resistivity weight does not live on the quadrature grid");
    if (eta.minCoeff() < 0.0) throw ConfigError("resistivity must be nonnegative");
    if (eta.maxCoeff() == 0.0) return st;
    Timer timer;
    const double dt = cfg.dt;
    const BoundaryMask& tmask = gk_.tangential_mask();
    const VectorXd& B0 = st.B.coeffs;
    if (Bref && Bref->size() != B0.size()) throw TypeError("linearization field is not in V2");
    const double eta_c = eta[0];

    // K x = M2 C M1^-1 M1[eta] M1^-1 C^T M2 x on the admissible test space
    auto Kop = [&](const VectorXd& x) -> VectorXd {
        const VectorXd j = gk_.mass_inverse(SpaceTag::V1, cx_.C().transpose() * gk_.mass_apply(SpaceTag::V2, x), &tmask);
        VectorXd t;
        if (constant_eta) {
            t = eta_c * j;
        } else {
            t = gk_.mass_inverse(SpaceTag::V1, gk_.weighted_apply(SpaceTag::V1, eta, j), &tmask);
        }
        return gk_.mass_apply(SpaceTag::V2, cx_.C() * t);
    };
    auto Aop = [&](const VectorXd& x) -> VectorXd { return gk_.mass_apply(SpaceTag::V2, x) + dt * Kop(x); };
    auto P = [&](const VectorXd& r) -> VectorXd { return gk_.mass_inverse(SpaceTag::V2, r); };
    const VectorXd diff = Bref ? VectorXd(B0 - *Bref) : B0;
    const VectorXd rhs = -dt * Kop(diff);
    VectorXd delta = VectorXd::Zero(B0.size());
    PcgOptions po;
    po.tol = cfg.linear_tol;
    long iters = pcg(Aop, P, rhs, delta, po).iterations;
    const VectorXd B1 = B0 + delta;

    const VectorXd J0 = gk_.dual_curl(B0);
    const VectorXd J1 = gk_.dual_curl(B1);
    const VectorXd Jh = 0.5 * (J0 + J1);
    const VectorXd Jt = Bref ? VectorXd(J1 - gk_.dual_curl(*Bref)) : J1;
    VectorXd heat = VectorXd::Zero(gk_.quad_size());
    for (int c = 0; c < 3; ++c)
        heat.array() += gk_.eval_quad(SpaceTag::V1, Jh, c).array() * gk_.eval_quad(SpaceTag::V1, Jt, c).array();
    heat.array() *= eta.array();

    const VectorXd rho0_q = positive_density(st.rho.coeffs);
    State out = st;
    out.B.coeffs = B1;
    out.s.coeffs = entropy_update(rho0_q, st.s.coeffs, heat, dt, cfg, iters);
    timings_.add("res", timer.seconds(), iters);
    return out;
}

namespace {

template <class Fn>
State named(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const NumericalError& e) {
        throw NumericalError(std::string(name) + ": " + e.message(), e.iterations(), e.residual());
    } catch (const StateError& e) {
        throw StateError(std::string(name) + ": " + e.what());
    }
}

} // namespace

State Integrator::strang_step(const State& st, const StepConfig& cfg) {
    if (!(cfg.dt > 0.0)) throw ConfigError("time step must be positive");
    if (!(cfg.picard_tol > 0.0) || !(cfg.linear_tol > 0.0)) throw ConfigError("tolerances must be positive");
    const Propagators& en = cfg.enabled;
    const WeightFunction mu = en.visc ? viscosity_weight(gk_, cfg.mu, st.u.coeffs) : VectorXd::Zero(gk_.quad_size());
    const WeightFunction eta = en.res ? resistivity_weight(gk_, cfg.eta, st.B.coeffs) : VectorXd::Zero(gk_.quad_size());
    const bool eta_const = cfg.eta.mode == DissipationSpec::Mode::Constant;
    const VectorXd* B0 = cfg.linearized_B0 ? &*cfg.linearized_B0 : nullptr;

    StepConfig half = cfg;
    half.dt = 0.5 * cfg.dt;
    const Anchor second = cfg.composition == Composition::Symmetric ? Anchor::End : Anchor::Start;

    State x = st;
    if (en.rho) x = named("rho", [&] { return step_rho(x, half, Anchor::Start); });
    if (en.m) x = named("m", [&] { return step_m(x, half, Anchor::Start); });
    if (en.s) x = named("s", [&] { return step_s(x, half, Anchor::Start); });
    if (en.B) x = named("B", [&] { return step_B(x, half, Anchor::Start); });
    if (en.visc) x = named("visc", [&] { return step_visc(x, half, mu); });
    if (en.res) x = named("res", [&] { return step_res(x, half, eta, eta_const, B0); });
    if (en.res) x = named("res", [&] { return step_res(x, half, eta, eta_const, B0); });
    if (en.visc) x = named("visc", [&] { return step_visc(x, half, mu); });
    if (en.B) x = named("B", [&] { return step_B(x, half, second); });
    if (en.s) x = named("s", [&] { return step_s(x, half, second); });
    if (en.m) x = named("m", [&] { return step_m(x, half, second); });
    if (en.rho) x = named("rho", [&] { return step_rho(x, half, second); });
    x.time = st.time + cfg.dt;
    return x;
}

} // namespace vrmhd
