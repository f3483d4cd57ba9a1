#pragma once

namespace vrmhd {

/// Perfect gas with internal energy density rho*e = rho^gamma exp(s/rho),
/// s being the entropy density.
class Eos {
public:
    explicit Eos(double gamma = 5.0 / 3.0);

    double gamma() const { return gamma_; }

    double rho_e(double rho, double s) const;
    /// T = d(rho e)/ds
    double temperature(double rho, double s) const;
    double pressure(double rho, double s) const;
    /// d(rho e)/d rho at fixed s
    double drho_e(double rho, double s) const;
    /// d^2(rho e)/d rho^2 at fixed s
    double d2rho_e(double rho, double s) const;
    /// d^2(rho e)/ds^2 at fixed rho
    double d2s_e(double rho, double s) const;

    /// Difference quotient of rho e in rho at fixed s.
    double dq_rho(double rho_a, double rho_b, double s) const;
    /// Difference quotient of rho e in s at fixed rho.
    double dq_s(double rho, double s_a, double s_b) const;

    /// Entropy density giving pressure p at density rho.
    double entropy_for_pressure(double rho, double p) const;

private:
    double gamma_;
};

} // namespace vrmhd
