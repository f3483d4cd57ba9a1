#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace vrmhd {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid sizes, inconsistent geometry, malformed configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Point outside the parametric domain of a space.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Field used with an operator defined on a different space.
class TypeError : public Error {
public:
    using Error::Error;
};

/// Nonpositive density, temperature or other unphysical thermodynamic state.
class StateError : public Error {
public:
    using Error::Error;
};

/// Linear or nonlinear solver failed to reach its tolerance.
class NumericalError : public Error {
public:
    NumericalError(const std::string& message, int iterations, double residual)
        : Error(format(message, iterations, residual)), message_(message), iterations_(iterations),
          residual_(residual) {}

    const std::string& message() const { return message_; }
    int iterations() const { return iterations_; }
    double residual() const { return residual_; }

private:
    static std::string format(const std::string& m, int it, double r) {
        char buf[96];
        std::snprintf(buf, sizeof buf, " (iterations=%d, residual=%.3e)", it, r);
        return m + buf;
    }

    std::string message_;
    int iterations_;
    double residual_;
};

/// Snapshot file is truncated, corrupt, or belongs to another discretization.
class IntegrityError : public Error {
public:
    using Error::Error;
};

} // namespace vrmhd
