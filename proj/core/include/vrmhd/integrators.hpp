#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "vrmhd/complex.hpp"
#include "vrmhd/eos.hpp"
#include "vrmhd/galerkin.hpp"
#include "vrmhd/stabilization.hpp"

namespace vrmhd {

/// Dynamical variables: velocity in X, density and entropy density in V3,
/// magnetic field in V2.
struct State {
    Field u{SpaceTag::X, {}};
    Field rho{SpaceTag::V3, {}};
    Field s{SpaceTag::V3, {}};
    Field B{SpaceTag::V2, {}};
    double time = 0.0;
};

/// Which end of the step the frozen coefficients of an ideal propagator are
/// taken from. End gives the adjoint of the Start method.
enum class Anchor { Start, End };

/// Symmetric: second half of the Strang step uses the adjoint propagators.
/// Palindromic: the same propagators in reversed order.
enum class Composition { Symmetric, Palindromic };

struct Propagators {
    bool rho = true, m = true, s = true, B = true, visc = true, res = true;
};

struct StepConfig {
    double dt = 1e-3;
    double picard_tol = 1e-10;
    int picard_max_iters = 50;
    double linear_tol = 1e-12;
    DissipationSpec mu;
    DissipationSpec eta;
    std::optional<Eigen::VectorXd> linearized_B0;  // coefficients in V2
    Composition composition = Composition::Symmetric;
    Propagators enabled;
};

/// Projected products that make up the split brackets:
///   A(f) v  = div Pi2(f v)      f in V3, v in X
///   K(B) v  = curl Pi1(B x v)   B in V2, v in X
///   L(a) v  = Pi0([a, v])       a, v in X
/// together with their transposes.
class SplitOperators {
public:
    explicit SplitOperators(const Galerkin& gk);

    const Galerkin& galerkin() const { return gk_; }
    const DeRhamComplex& complex() const { return cx_; }

    struct ScalarAtFaces { std::array<Eigen::VectorXd, 3> v; };
    struct FieldAtEdges { std::array<std::array<Eigen::VectorXd, 3>, 3> v; };

    ScalarAtFaces sample_faces(const Eigen::VectorXd& f) const;
    FieldAtEdges sample_edges(const Eigen::VectorXd& B) const;

    Eigen::VectorXd flux(const ScalarAtFaces& f, const Eigen::VectorXd& v) const;           // Pi2(f v)
    Eigen::VectorXd flux_adjoint(const ScalarAtFaces& f, const Eigen::VectorXd& z) const;
    Eigen::VectorXd A(const ScalarAtFaces& f, const Eigen::VectorXd& v) const;
    Eigen::VectorXd A_adjoint(const ScalarAtFaces& f, const Eigen::VectorXd& y) const;

    Eigen::VectorXd emf(const FieldAtEdges& B, const Eigen::VectorXd& v) const;             // Pi1(B x v)
    Eigen::VectorXd emf_adjoint(const FieldAtEdges& B, const Eigen::VectorXd& z) const;
    Eigen::VectorXd K(const FieldAtEdges& B, const Eigen::VectorXd& v) const;
    Eigen::VectorXd K_adjoint(const FieldAtEdges& B, const Eigen::VectorXd& y) const;

    Eigen::VectorXd bracket(const Eigen::VectorXd& a, const Eigen::VectorXd& v) const;      // L(a) v
    Eigen::VectorXd bracket_adjoint(const Eigen::VectorXd& a, const Eigen::VectorXd& m) const;

private:
    const Galerkin& gk_;
    const DeRhamComplex& cx_;
};

/// Wall-clock and iteration counters per propagator.
struct StepTimings {
    std::map<std::string, double> seconds;
    std::map<std::string, long> calls;
    std::map<std::string, long> iterations;
    void add(const std::string& name, double sec, long iters);
};

class Integrator {
public:
    Integrator(const Galerkin& gk, Eos eos);

    const Galerkin& galerkin() const { return gk_; }
    const Eos& eos() const { return eos_; }
    const SplitOperators& ops() const { return ops_; }

    State step_m(const State& st, const StepConfig& cfg, Anchor anchor = Anchor::Start);
    State step_rho(const State& st, const StepConfig& cfg, Anchor anchor = Anchor::Start);
    State step_s(const State& st, const StepConfig& cfg, Anchor anchor = Anchor::Start);
    State step_B(const State& st, const StepConfig& cfg, Anchor anchor = Anchor::Start);
    State step_visc(const State& st, const StepConfig& cfg);
    State step_res(const State& st, const StepConfig& cfg);
    State step_res_linearized(const State& st, const StepConfig& cfg);

    /// Dissipative steps with precomputed weights.
    State step_visc(const State& st, const StepConfig& cfg, const WeightFunction& mu);
    State step_res(const State& st, const StepConfig& cfg, const WeightFunction& eta, bool constant_eta,
                   const Eigen::VectorXd* B0);

    State strang_step(const State& st, const StepConfig& cfg);

    StepTimings& timings() { return timings_; }
    const StepTimings& timings() const { return timings_; }

    /// Internal energy density samples at the quadrature nodes.
    Eigen::VectorXd rho_e_quad(const Eigen::VectorXd& rho, const Eigen::VectorXd& s) const;

private:
    struct Convergence;
    Eigen::VectorXd entropy_update(const Eigen::VectorXd& rho_q, const Eigen::VectorXd& s0,
                                   const Eigen::VectorXd& heat, double dt, const StepConfig& cfg, long& iters);
    Eigen::VectorXd positive_density(const Eigen::VectorXd& rho) const;

    const Galerkin& gk_;
    const DeRhamComplex& cx_;
    Eos eos_;
    SplitOperators ops_;
    StepTimings timings_;
};

} // namespace vrmhd
