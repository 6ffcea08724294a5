#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "fmx/error.hpp"

namespace fmx {

/// Fractional orders of the linearized Maxwell law together with the
/// derived exponents delta = beta - alpha and omega = delta / (2 - delta).
class KernelParams {
public:
    KernelParams(double alpha, double beta) : alpha_(alpha), beta_(beta)
    {
        if (!(std::isfinite(alpha) && std::isfinite(beta) && 0.0 < alpha && alpha < beta && beta < 1.0)) {
            throw ValidationError("fractional orders must satisfy 0<alpha<beta<1 (got alpha=" +
                                  std::to_string(alpha) + ", beta=" + std::to_string(beta) + ")");
        }
    }

    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] double beta() const noexcept { return beta_; }
    [[nodiscard]] double delta() const noexcept { return beta_ - alpha_; }
    [[nodiscard]] double omega() const noexcept { return delta() / (2.0 - delta()); }

    friend bool operator==(const KernelParams&, const KernelParams&) = default;

private:
    double alpha_;
    double beta_;
};

/// Controls for the adaptive Gauss-Kronrod integrator.
///
/// `endpoint_exponent` e in (0, 2] declares an r^(e-1) behaviour of the
/// integrand at the left end of a half-line integral; the integrator maps it
/// away with r = v^(1/e) before subdividing.
struct QuadratureSpec {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    int max_subdivisions = 2000;
    double endpoint_exponent = 1.0;

    void validate() const
    {
        if (!(abs_tol > 0.0 && rel_tol > 0.0)) throw DomainError("quadrature tolerances must be positive");
        if (max_subdivisions < 1) throw DomainError("max_subdivisions must be at least 1");
        if (!(endpoint_exponent > 0.0 && endpoint_exponent <= 2.0))
            throw DomainError("endpoint_exponent must lie in (0,2]");
    }

    [[nodiscard]] QuadratureSpec with_endpoint(double e) const
    {
        QuadratureSpec q = *this;
        q.endpoint_exponent = e;
        return q;
    }

    [[nodiscard]] QuadratureSpec with_tol(double tol) const
    {
        QuadratureSpec q = *this;
        q.abs_tol = tol;
        q.rel_tol = tol;
        return q;
    }
};

} // namespace fmx
