#pragma once

// Relaxation kernels W0, E_alpha, rho and the power-law memory kernels.
//
// Every kernel K here is completely monotone, K(t) = int_0^inf g(r) e^{-rt} dr,
// and the spectral densities g are exposed for the sum-of-exponentials
// discretization used by the time stepper.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "fmx/error.hpp"
#include "fmx/params.hpp"
#include "fmx/quadrature.hpp"

namespace fmx {

enum class Kernel { W0, Ealpha, Rho, Mu1, Mu2 };

namespace detail {

inline double ml_denominator(double r, double alpha)
{
    const double ra = std::pow(r, alpha);
    return ra * ra + 2.0 * ra * std::cos(alpha * std::numbers::pi) + 1.0;
}

inline void require_positive_time(double t, const char* who)
{
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError(std::string(who) + ": requires finite t > 0");
}

} // namespace detail

/// Spectral density g(r) of a kernel, r > 0.
inline double spectral_density(Kernel k, double r, const KernelParams& p)
{
    const double a = p.alpha();
    const double b = p.beta();
    const double pi = std::numbers::pi;
    switch (k) {
    case Kernel::W0:
        return std::sin(a * pi) / pi * std::pow(r, a - 1.0) / detail::ml_denominator(r, a);
    case Kernel::Ealpha:
        return std::sin(a * pi) / pi * std::pow(r, a) / detail::ml_denominator(r, a);
    case Kernel::Rho:
        return std::pow(r, b - 1.0) * (std::pow(r, a) * std::sin(pi * p.delta()) + std::sin(pi * b)) /
               (pi * detail::ml_denominator(r, a));
    case Kernel::Mu1:
        return std::sin(a * pi) / pi * std::pow(r, a - 1.0);
    case Kernel::Mu2:
        return std::sin(b * pi) / pi * std::pow(r, b - 1.0);
    }
    return 0.0;
}

/// Exponent e with g(r) ~ r^(e-1) as r -> 0.
inline double density_exponent_at_zero(Kernel k, const KernelParams& p)
{
    switch (k) {
    case Kernel::W0: return p.alpha();
    case Kernel::Ealpha: return 1.0 + p.alpha();
    case Kernel::Rho: return p.beta();
    case Kernel::Mu1: return p.alpha();
    case Kernel::Mu2: return p.beta();
    }
    return 1.0;
}

/// Exponent e with g(r)/r ~ (1/r)^(e+1) as r -> inf, i.e. g(r) ~ r^(-e).
inline double density_decay_at_infinity(Kernel k, const KernelParams& p)
{
    switch (k) {
    case Kernel::W0: return 1.0 + p.alpha();
    case Kernel::Ealpha: return p.alpha();
    case Kernel::Rho: return 1.0 - p.delta();
    case Kernel::Mu1: return 1.0 - p.alpha();
    case Kernel::Mu2: return 1.0 - p.beta();
    }
    return 1.0;
}

/// K(t) by quadrature of the spectral representation, t > 0.
inline double eval_spectral(Kernel k, double t, const KernelParams& p, const QuadratureSpec& q = {})
{
    detail::require_positive_time(t, "eval_spectral");
    auto f = [&](double r) { return spectral_density(k, r, p) * std::exp(-r * t); };
    return quad::integrate_half_line(f, q.with_endpoint(density_exponent_at_zero(k, p)), 1.0 / t).value;
}

/// int_a^b K(t) dt for 0 <= a < b, from the spectral representation.
inline double kernel_panel_integral(Kernel k, double a, double b, const KernelParams& p, const QuadratureSpec& q = {})
{
    if (!(a >= 0.0 && b > a)) throw DomainError("kernel_panel_integral: requires 0 <= a < b");
    const double h = b - a;
    auto f = [&](double r) { return spectral_density(k, r, p) * std::exp(-r * a) * (-std::expm1(-r * h)) / r; };
    // Split at R = 1/h; beyond R, r = R/v turns the algebraic tail into an endpoint singularity.
    const double R = 1.0 / h;
    const double head = quad::integrate_left_singular(f, R, density_exponent_at_zero(k, p), q).value;
    auto tail = [&](double v) { return f(R / v) * R / (v * v); };
    const double e_inf = std::min(2.0, density_decay_at_infinity(k, p) + (a > 0.0 ? 1.0 : 0.0));
    return head + quad::integrate_left_singular(tail, 1.0, e_inf, q).value;
}

/// Relaxation function W0(t), t >= 0; exactly 1 at t = 0.
inline double eval_W0(double t, const KernelParams& p, const QuadratureSpec& q = {})
{
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("eval_W0: requires finite t >= 0");
    if (t == 0.0) return 1.0;
    const double a = p.alpha();
    const double c = std::sin(a * std::numbers::pi) / std::numbers::pi;
    auto f = [&](double r) { return c * std::exp(-r * t) * std::pow(r, a - 1.0) / detail::ml_denominator(r, a); };
    return quad::integrate_half_line(f, q.with_endpoint(a), 1.0 / t).value;
}

/// Resolvent kernel E_alpha(t) = -W0'(t), t > 0.
inline double eval_Ealpha(double t, const KernelParams& p, const QuadratureSpec& q = {})
{
    detail::require_positive_time(t, "eval_Ealpha");
    const double a = p.alpha();
    const double c = std::sin(a * std::numbers::pi) / std::numbers::pi;
    auto f = [&](double r) { return c * std::exp(-r * t) * std::pow(r, a) / detail::ml_denominator(r, a); };
    return quad::integrate_half_line(f, q.with_endpoint(1.0 + a), 1.0 / t).value;
}

/// rho(t) = (E_alpha * s^-beta / Gamma(1-beta))(t), t > 0, by direct quadrature
/// of the convolution split at t/2.
inline double eval_rho(double t, const KernelParams& p, const QuadratureSpec& q = {})
{
    detail::require_positive_time(t, "eval_rho");
    const double a = p.alpha();
    const double b = p.beta();
    const double half = 0.5 * t;
    // The inner kernel evaluations run two digits tighter than the outer sum.
    const QuadratureSpec inner = q.with_tol(std::max(1e-15, 1e-2 * std::min(q.abs_tol, q.rel_tol)));

    // s in (0, t/2]: s^-beta singular, E_alpha(t - s) smooth.
    auto left = [&](double s) { return eval_Ealpha(t - s, p, inner) * std::pow(s, -b); };
    // tau = t - s in (0, t/2]: E_alpha(tau) ~ tau^(alpha-1), s^-beta smooth.
    auto right = [&](double tau) { return eval_Ealpha(tau, p, inner) * std::pow(t - tau, -b); };

    const double v1 = quad::integrate_left_singular(left, half, 1.0 - b, q).value;
    const double v2 = quad::integrate_left_singular(right, half, a, q).value;
    return (v1 + v2) / std::tgamma(1.0 - b);
}

/// Power-law memory kernels (mu1(t), mu2(t)) = (t^-alpha/Gamma(1-alpha), t^-beta/Gamma(1-beta)).
inline std::pair<double, double> eval_mu_kernels(double t, const KernelParams& p)
{
    detail::require_positive_time(t, "eval_mu_kernels");
    return {std::pow(t, -p.alpha()) / std::tgamma(1.0 - p.alpha()),
            std::pow(t, -p.beta()) / std::tgamma(1.0 - p.beta())};
}

} // namespace fmx
