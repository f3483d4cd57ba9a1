#pragma once

#include <Eigen/Core>

#include "vrmhd/galerkin.hpp"

namespace vrmhd {

/// How a dissipation coefficient (viscosity or resistivity) is set.
struct DissipationSpec {
    enum class Mode { Off, Constant, Artificial };
    Mode mode = Mode::Off;
    double value = 0.0;  // the constant, or the artificial coefficient

    static DissipationSpec off() { return {}; }
    static DissipationSpec constant(double v) { return {Mode::Constant, v}; }
    static DissipationSpec artificial(double c) { return {Mode::Artificial, c}; }

    bool active() const { return mode != Mode::Off && value != 0.0; }
};

/// mu_a |grad u|_F at every quadrature node.
WeightFunction artificial_mu(const Galerkin& gk, const Eigen::VectorXd& u, double mu_a);

/// eta_a |curl~ B| at every quadrature node.
WeightFunction artificial_eta(const Galerkin& gk, const Eigen::VectorXd& B, double eta_a);

/// 2 h^2 with h the smallest cell edge.
double default_artificial_coefficient(const DeRhamComplex& cx);

/// Weight field of a spec: zero, constant, or the artificial formula applied
/// to u (viscosity) or B (resistivity).
WeightFunction viscosity_weight(const Galerkin& gk, const DissipationSpec& spec, const Eigen::VectorXd& u);
WeightFunction resistivity_weight(const Galerkin& gk, const DissipationSpec& spec, const Eigen::VectorXd& B);

} // namespace vrmhd
