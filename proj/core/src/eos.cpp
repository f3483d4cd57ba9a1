#include "vrmhd/eos.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <string>

#include "vrmhd/errors.hpp"

namespace vrmhd {

namespace {

constexpr double kDegenerate = 1e-8;

void check_density(double rho) {
    if (!(rho > 0.0)) throw StateError("nonpositive density " + std::to_string(rho));
}

} // namespace

Eos::Eos(double gamma) : gamma_(gamma) {
    if (!(gamma > 1.0)) throw ConfigError("adiabatic index must exceed 1");
}

double Eos::rho_e(double rho, double s) const {
    check_density(rho);
    return std::exp(gamma_ * std::log(rho) + s / rho);
}

double Eos::temperature(double rho, double s) const { return rho_e(rho, s) / rho; }

double Eos::pressure(double rho, double s) const { return (gamma_ - 1.0) * rho_e(rho, s); }

double Eos::drho_e(double rho, double s) const {
    return rho_e(rho, s) * (gamma_ / rho - s / (rho * rho));
}

double Eos::d2rho_e(double rho, double s) const {
    const double f1 = gamma_ / rho - s / (rho * rho);
    const double f2 = -gamma_ / (rho * rho) + 2.0 * s / (rho * rho * rho);
    return rho_e(rho, s) * (f1 * f1 + f2);
}

double Eos::d2s_e(double rho, double s) const { return rho_e(rho, s) / (rho * rho); }

double Eos::dq_rho(double rho_a, double rho_b, double s) const {
    check_density(rho_a);
    check_density(rho_b);
    if (rho_b < rho_a) std::swap(rho_a, rho_b);
    const double d = rho_b - rho_a;
    if (d < kDegenerate * rho_b) return drho_e(0.5 * (rho_a + rho_b), s);
    // log(rho e) = gamma log(rho) + s / rho; difference the logarithm first
    const double h = gamma_ * std::log1p(d / rho_a) - s * d / (rho_a * rho_b);
    return rho_e(rho_a, s) * std::expm1(h) / d;
}

double Eos::dq_s(double rho, double s_a, double s_b) const {
    check_density(rho);
    if (s_b < s_a) std::swap(s_a, s_b);
    const double d = s_b - s_a;
    if (d == 0.0 || std::abs(d) < kDegenerate * std::max(std::abs(s_a), std::abs(s_b))) return temperature(rho, 0.5 * (s_a + s_b));
    // rho e(s_b) - rho e(s_a) = rho e(s_a) (exp(d/rho) - 1), without cancellation
    return rho_e(rho, s_a) * std::expm1(d / rho) / d;
}

double Eos::entropy_for_pressure(double rho, double p) const {
    check_density(rho);
    if (!(p > 0.0)) throw StateError("nonpositive pressure");
    return rho * (std::log(p / (gamma_ - 1.0)) - gamma_ * std::log(rho));
}

} // namespace vrmhd
