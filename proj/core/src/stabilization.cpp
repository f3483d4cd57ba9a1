#include "vrmhd/stabilization.hpp"

#include "vrmhd/errors.hpp"

namespace vrmhd {

using Eigen::VectorXd;

WeightFunction artificial_mu(const Galerkin& gk, const VectorXd& u, double mu_a) {
    if (mu_a < 0.0) throw ConfigError("artificial viscosity coefficient must be nonnegative");
    const DeRhamComplex& cx = gk.complex();
    VectorXd sq = VectorXd::Zero(gk.quad_size());
    for (int c = 0; c < 3; ++c)
        for (int d = 0; d < 3; ++d) {
            if (!cx.axis(d).active) continue;
            const VectorXd g = gk.eval_quad(SpaceTag::X, u, c, d);
            sq.array() += g.array().square();
        }
    return mu_a * sq.cwiseSqrt();
}

WeightFunction artificial_eta(const Galerkin& gk, const VectorXd& B, double eta_a) {
    if (eta_a < 0.0) throw ConfigError("artificial resistivity coefficient must be nonnegative");
    const VectorXd j = gk.dual_curl(B);
    VectorXd sq = VectorXd::Zero(gk.quad_size());
    for (int c = 0; c < 3; ++c) sq.array() += gk.eval_quad(SpaceTag::V1, j, c).array().square();
    return eta_a * sq.cwiseSqrt();
}

double default_artificial_coefficient(const DeRhamComplex& cx) {
    const double h = cx.min_cell_size();
    return 2.0 * h * h;
}

WeightFunction viscosity_weight(const Galerkin& gk, const DissipationSpec& spec, const VectorXd& u) {
    switch (spec.mode) {
    case DissipationSpec::Mode::Off: return VectorXd::Zero(gk.quad_size());
    case DissipationSpec::Mode::Constant:
        if (spec.value < 0.0) throw ConfigError("viscosity must be nonnegative");
        return VectorXd::Constant(gk.quad_size(), spec.value);
    case DissipationSpec::Mode::Artificial: return artificial_mu(gk, u, spec.value);
    }
    return {};
}

WeightFunction resistivity_weight(const Galerkin& gk, const DissipationSpec& spec, const VectorXd& B) {
    switch (spec.mode) {
    case DissipationSpec::Mode::Off: return VectorXd::Zero(gk.quad_size());
    case DissipationSpec::Mode::Constant:
        if (spec.value < 0.0) throw ConfigError("resistivity must be nonnegative");
        return VectorXd::Constant(gk.quad_size(), spec.value);
    case DissipationSpec::Mode::Artificial: return artificial_eta(gk, B, spec.value);
    }
    return {};
}

} // namespace vrmhd
