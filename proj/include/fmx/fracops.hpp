#pragma once

// Caputo derivative, Riemann-Liouville integral and Laplace transform of
// sampled functions by product integration against the piecewise-linear
// interpolant, plus the scalar relaxation equation D^a f + f = F.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "fmx/error.hpp"
#include "fmx/kernels.hpp"
#include "fmx/params.hpp"
#include "fmx/quadrature.hpp"
#include "fmx/soe.hpp"
#include "fmx/time_grid.hpp"

namespace fmx {

namespace detail {

inline void require_order(double a, const char* who)
{
    if (!(a > 0.0 && a < 1.0)) throw DomainError(std::string(who) + ": order must lie in (0,1)");
}

// d^e - (d - h)^e for 0 < h <= d without cancellation when h << d.
inline double pow_diff(double d, double h, double e)
{
    if (h >= 0.5 * d) return std::pow(d, e) - std::pow(d - h, e);
    return -std::pow(d, e) * std::expm1(e * std::log1p(-h / d));
}

} // namespace detail

/// Caputo derivative of order alpha at every node:
/// (1/Gamma(1-alpha)) int_0^t (t - s)^{-alpha} f'(s) ds with f' the piecewise-constant slope.
template <class V>
SampledFunction<V> caputo_derivative(const SampledFunction<V>& f, double alpha)
{
    detail::require_order(alpha, "caputo_derivative");
    const TimeGrid& g = f.grid;
    if (g.size() < 2) throw DomainError("caputo_derivative: need at least two nodes");
    const double e = 1.0 - alpha;
    const double c = 1.0 / std::tgamma(2.0 - alpha);
    std::vector<V> slope(g.steps());
    for (std::size_t j = 0; j < g.steps(); ++j) slope[j] = (f[j + 1] - f[j]) / g.step(j + 1);
    std::vector<V> out(g.size(), V{});
    if (g.grading() == 1.0) {
        // Uniform mesh: the weights depend on n - j only. rev[N - 1 - k] holds the
        // weight of lag k so the inner product runs forward in memory.
        const std::size_t N = g.steps();
        const double h = g.step(1);
        std::vector<double> rev(N);
        for (std::size_t k = 0; k < N; ++k)
            rev[N - 1 - k] = std::pow(h, e) * detail::pow_diff(static_cast<double>(k + 1), 1.0, e);
        for (std::size_t n = 1; n < g.size(); ++n) {
            const double* w = rev.data() + (N - n);
            std::array<V, 4> acc{};
            std::size_t j = 0;
            for (; j + 4 <= n; j += 4)
                for (std::size_t u = 0; u < 4; ++u) acc[u] += slope[j + u] * w[j + u];
            for (; j < n; ++j) acc[0] += slope[j] * w[j];
            out[n] = c * ((acc[0] + acc[1]) + (acc[2] + acc[3]));
        }
        return SampledFunction<V>(g, std::move(out));
    }
    for (std::size_t n = 1; n < g.size(); ++n) {
        const double tn = g[n];
        V s{};
        for (std::size_t j = 0; j < n; ++j) s += slope[j] * detail::pow_diff(tn - g[j], g.step(j + 1), e);
        out[n] = c * s;
    }
    return SampledFunction<V>(g, std::move(out));
}

/// Riemann-Liouville integral I^{1-beta} f at every node:
/// (1/Gamma(1-beta)) int_0^t (t - s)^{-beta} f(s) ds with f piecewise linear.
template <class V>
SampledFunction<V> rl_integral(const SampledFunction<V>& f, double beta)
{
    detail::require_order(beta, "rl_integral");
    const TimeGrid& g = f.grid;
    if (g.size() < 2) throw DomainError("rl_integral: need at least two nodes");
    const double e1 = 1.0 - beta;
    const double e2 = 2.0 - beta;
    const double c = 1.0 / std::tgamma(1.0 - beta);
    std::vector<V> out(g.size(), V{});
    for (std::size_t n = 1; n < g.size(); ++n) {
        const double tn = g[n];
        V s{};
        for (std::size_t j = 0; j < n; ++j) {
            // Hat-function weights for f_j and f_{j+1} on [t_j, t_{j+1}], with d = t_n - t.
            const double h = g.step(j + 1);
            const double d0 = tn - g[j];
            const double m0 = detail::pow_diff(d0, h, e1) / e1;
            const double m1 = detail::pow_diff(d0, h, e2) / e2;
            // int (t - t_j)/h (t_n - t)^{-beta} dt = (d0 m0 - m1) / h
            const double wr = (d0 * m0 - m1) / h;
            s += f[j] * m0 + (f[j + 1] - f[j]) * wr;
        }
        out[n] = c * s;
    }
    return SampledFunction<V>(g, std::move(out));
}

struct LaplaceResult {
    std::complex<double> value;
    /// Bound on the neglected tail int_T^inf, assuming |f| <= |f(T)| beyond T.
    double truncation_bound = 0.0;
};

/// int_0^T e^{-st} f(t) dt for the piecewise-linear interpolant, Re(s) > 0.
template <class V>
LaplaceResult laplace_numeric(const SampledFunction<V>& f, std::complex<double> s)
{
    if (!(s.real() > 0.0)) throw DomainError("laplace_numeric: requires Re(s) > 0");
    using C = std::complex<double>;
    const TimeGrid& g = f.grid;
    C total{};
    for (std::size_t j = 0; j + 1 < g.size(); ++j) {
        const double h = g.step(j + 1);
        const StepFactors<C> k(s * h);
        const C w0 = k.phi1 - k.phi2;
        total += h * std::exp(-s * g[j]) * (w0 * C(f[j]) + k.phi2 * C(f[j + 1]));
    }
    LaplaceResult r;
    r.value = total;
    r.truncation_bound = std::abs(C(f[g.size() - 1])) * std::exp(-s.real() * g.horizon()) / s.real();
    return r;
}

/// Horizon T with e^{-Re(s) T} <= eps.
inline double laplace_horizon(std::complex<double> s, double eps = 1e-12)
{
    if (!(s.real() > 0.0)) throw DomainError("laplace_horizon: requires Re(s) > 0");
    return -std::log(eps) / s.real();
}

namespace detail {

// W0 and E_alpha depend on alpha only; beta is a placeholder.
inline KernelParams alpha_only(double alpha) { return KernelParams(alpha, 0.5 * (1.0 + alpha)); }

} // namespace detail

/// f = E_alpha * F + a W0 on the grid of F, with the convolution integrated
/// exactly against the piecewise-linear F for an exponential-sum E_alpha.
inline SampledFunction<double> solve_scalar_fractional(const SampledFunction<double>& F, double a, double alpha)
{
    detail::require_order(alpha, "solve_scalar_fractional");
    const TimeGrid& g = F.grid;
    const KernelParams p = detail::alpha_only(alpha);
    const ExpSum E = build_exp_sum(Kernel::Ealpha, p, g.horizon(), g.min_step());
    std::vector<double> out = convolve(E, g, F.values);
    if (a != 0.0) {
        const ExpSum W = build_exp_sum(Kernel::W0, p, g.horizon(), g.min_step());
        out[0] += a;
        for (std::size_t n = 1; n < g.size(); ++n) out[n] += a * W(g[n]);
    }
    return SampledFunction<double>(g, std::move(out));
}

/// Smooth bump exp(-1/(1-x^2)), x = (t - center)/width, supported on |x| < 1.
struct Bump {
    double center;
    double width;

    [[nodiscard]] double operator()(double t) const
    {
        const double x = (t - center) / width;
        const double d = 1.0 - x * x;
        return d > 0.0 ? std::exp(-1.0 / d) : 0.0;
    }

    [[nodiscard]] double derivative(double t) const
    {
        const double x = (t - center) / width;
        const double d = 1.0 - x * x;
        if (d <= 0.0) return 0.0;
        return std::exp(-1.0 / d) * (-2.0 * x / (d * d)) / width;
    }

    [[nodiscard]] double lo() const { return center - width; }
    [[nodiscard]] double hi() const { return center + width; }
};

/// The default detector bank: bumps at T/4, T/2, 3T/4 of width T/8.
inline std::array<Bump, 3> default_bumps(double horizon)
{
    const double w = horizon / 8.0;
    return {Bump{horizon / 4.0, w}, Bump{horizon / 2.0, w}, Bump{0.75 * horizon, w}};
}

/// Precomputed pairing data for the weak form of D^alpha_{t,a} f + f - F
/// against a bank of bumps on one grid.
class TestFunctionBank {
public:
    TestFunctionBank(const TimeGrid& grid, double alpha, std::span<const Bump> bumps = {},
                     const QuadratureSpec& q = QuadratureSpec{}.with_tol(1e-13))
        : grid_(grid), alpha_(alpha)
    {
        detail::require_order(alpha, "TestFunctionBank");
        const auto defaults = default_bumps(grid.horizon());
        if (bumps.empty()) bumps = defaults;
        const quad::GaussLegendre gl(8);
        const double gam = std::tgamma(1.0 - alpha);
        for (const Bump& phi : bumps) {
            if (!(phi.lo() >= 0.0 && phi.hi() <= grid.horizon()))
                throw DomainError("TestFunctionBank: bump support must lie inside [0, T]");
            Entry e;
            e.bump = phi;
            e.singular = quad::integrate([&](double t) { return phi(t) * std::pow(t, -alpha); }, phi.lo(), phi.hi(), q).value / gam;
            // Phi(t) = int_0^inf phi'(t + tau) tau^{-alpha} dtau on Gauss points of every panel in [0, hi].
            for (std::size_t j = 0; j < grid.steps() && grid[j] < phi.hi(); ++j) {
                const double a = grid[j];
                const double b = std::min(grid[j + 1], phi.hi());
                for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
                    const double t = a + 0.5 * (b - a) * (gl.nodes[i] + 1.0);
                    const double w = 0.5 * (b - a) * gl.weights[i];
                    double Phi = 0.0;
                    if (t < phi.lo()) {
                        Phi = quad::integrate([&](double u) { return phi.derivative(u) * std::pow(u - t, -alpha); },
                                              phi.lo(), phi.hi(), q)
                                  .value;
                    } else {
                        Phi = quad::integrate_left_singular([&](double tau) { return phi.derivative(t + tau) * std::pow(tau, -alpha); },
                                                            phi.hi() - t, 1.0 - alpha, q)
                                  .value;
                    }
                    e.memory.push_back({j, (t - a) / grid.step(j + 1), w * Phi / gam, w * phi(t)});
                }
            }
            entries_.push_back(std::move(e));
        }
    }

    [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }

    /// <D^alpha_{t,a} f + f - F, phi_i> for bump i.
    [[nodiscard]] double pairing(std::size_t i, std::span<const double> f, double a, std::span<const double> F) const
    {
        const Entry& e = entries_[i];
        double s = -a * e.singular;
        for (const Point& p : e.memory) {
            const double fv = f[p.panel] * (1.0 - p.s) + f[p.panel + 1] * p.s;
            const double Fv = F[p.panel] * (1.0 - p.s) + F[p.panel + 1] * p.s;
            s += -fv * p.memory_weight + (fv - Fv) * p.bump_weight;
        }
        return s;
    }

    /// max_i |<D^alpha_{t,a} f + f - F, phi_i>|.
    [[nodiscard]] double residual(const SampledFunction<double>& f, double a, const SampledFunction<double>& F) const
    {
        if (f.size() != grid_.size() || F.size() != grid_.size())
            throw DomainError("dta_residual: samples do not match the bank grid");
        double worst = 0.0;
        for (std::size_t i = 0; i < entries_.size(); ++i)
            worst = std::max(worst, std::abs(pairing(i, f.values, a, F.values)));
        return worst;
    }

private:
    struct Point {
        std::size_t panel;
        double s;
        double memory_weight;
        double bump_weight;
    };
    struct Entry {
        Bump bump{};
        double singular = 0.0;
        std::vector<Point> memory;
    };

    TimeGrid grid_;
    double alpha_;
    std::vector<Entry> entries_;
};

/// Weak residual of D^alpha_{t,a} f + f = F over the default bump bank.
inline double dta_residual(const SampledFunction<double>& f, double a, double alpha, const SampledFunction<double>& F)
{
    if (!(f.grid.steps() == F.grid.steps() && f.grid.horizon() == F.grid.horizon() &&
          f.grid.grading() == F.grid.grading()))
        throw DomainError("dta_residual: f and F must share a grid");
    return TestFunctionBank(f.grid, alpha).residual(f, a, F);
}

} // namespace fmx
