#pragma once

// Sum-of-exponentials discretization of completely monotone kernels and the
// exact convolution of such sums with piecewise-linear data on a TimeGrid.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "fmx/error.hpp"
#include "fmx/kernels.hpp"
#include "fmx/params.hpp"
#include "fmx/quadrature.hpp"
#include "fmx/time_grid.hpp"

namespace fmx {

/// Step integrals of e^{-z u} over u in [0, 1] for z = r h >= 0:
/// phi1 = int e^{-zu}, phi2 = int u e^{-zu}, chi1 = (1 - phi1)/z, chi2 = (1/2 - phi2)/z.
template <class Z>
struct StepFactors {
    Z decay;
    Z phi1;
    Z phi2;
    Z chi1;
    Z chi2;

    explicit StepFactors(Z z)
    {
        decay = std::exp(-z);
        if (std::abs(z) < 0.5) {
            // Power series; 24 terms leave < 1e-30 at |z| = 0.5.
            Z p1{0.0}, p2{0.0}, c1{0.0}, c2{0.0};
            Z zk{1.0};
            double fact = 1.0;
            for (int k = 0; k < 24; ++k) {
                if (k > 0) {
                    zk *= -z;
                    fact *= k;
                }
                p1 += zk / (fact * (k + 1));
                p2 += zk / (fact * (k + 2));
                c1 += zk / (fact * (k + 1) * (k + 2));
                c2 += zk / (fact * (k + 1) * (k + 3));
            }
            phi1 = p1;
            phi2 = p2;
            chi1 = c1;
            chi2 = c2;
        } else {
            phi1 = (Z{1.0} - decay) / z;
            phi2 = (phi1 - decay) / z;
            chi1 = (Z{1.0} - phi1) / z;
            chi2 = (Z{0.5} - phi2) / z;
        }
    }
};

/// K(t) ~ sum_m weights[m] e^{-rates[m] t} + instant * delta(t).
struct ExpSum {
    std::vector<double> rates;
    std::vector<double> weights;
    double instant = 0.0;

    [[nodiscard]] std::size_t size() const noexcept { return rates.size(); }

    [[nodiscard]] double operator()(double t) const
    {
        double s = 0.0;
        for (std::size_t m = 0; m < rates.size(); ++m) s += weights[m] * std::exp(-rates[m] * t);
        return s;
    }
};

struct ExpSumOptions {
    double points_per_panel = 10;
    /// Spectral mass below low_cut / T is lumped into one exponential.
    double low_cut = 1e-8;
    /// Spectrum above max(high_floor, high_cut / h_min) becomes the delta term.
    double high_cut = 1e4;
    double high_floor = 1e8;
    QuadratureSpec quad = QuadratureSpec{}.with_tol(1e-14);
};

/// Composite Gauss-Legendre discretization of K(t) = int g(r) e^{-rt} dr in x = ln r.
inline ExpSum build_exp_sum(Kernel k, const KernelParams& p, double horizon, double min_step,
                            const ExpSumOptions& opt = {})
{
    if (!(horizon > 0.0 && min_step > 0.0)) throw DomainError("build_exp_sum: horizon and min_step must be positive");
    const double r_lo = opt.low_cut / horizon;
    const double r_hi = std::max(opt.high_floor, opt.high_cut / min_step);
    const double x_lo = std::log(r_lo);
    const double x_hi = std::log(r_hi);
    double width = 1.0;
    if (k == Kernel::W0 || k == Kernel::Ealpha || k == Kernel::Rho)
        width = std::min(1.0, 0.5 * std::numbers::pi * (1.0 - p.alpha()) / p.alpha());
    const auto panels = static_cast<std::size_t>(std::ceil((x_hi - x_lo) / width));
    const double w = (x_hi - x_lo) / static_cast<double>(panels);
    const quad::GaussLegendre gl(static_cast<std::size_t>(opt.points_per_panel));

    ExpSum out;
    out.rates.reserve(panels * gl.nodes.size() + 1);
    out.weights.reserve(panels * gl.nodes.size() + 1);

    const double e0 = density_exponent_at_zero(k, p);
    auto g = [&](double r) { return spectral_density(k, r, p); };
    const double mass = quad::integrate_left_singular(g, r_lo, e0, opt.quad).value;
    const double first = quad::integrate_left_singular([&](double r) { return g(r) * r; }, r_lo, e0, opt.quad).value;
    if (mass > 0.0) {
        out.rates.push_back(first / mass);
        out.weights.push_back(mass);
    }

    for (std::size_t j = 0; j < panels; ++j) {
        const double a = x_lo + w * static_cast<double>(j);
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
            const double x = a + 0.5 * w * (gl.nodes[i] + 1.0);
            const double r = std::exp(x);
            out.rates.push_back(r);
            out.weights.push_back(0.5 * w * gl.weights[i] * g(r) * r);
        }
    }

    const double e_inf = density_decay_at_infinity(k, p);
    auto tail = [&](double v) { return g(r_hi / v) / v; };
    out.instant = quad::integrate_left_singular(tail, 1.0, std::min(2.0, e_inf), opt.quad).value;
    return out;
}

/// Exact convolutions (K_h * f_j)(t_n) for several piecewise-linear series at
/// once; the per-step exponential factors are shared. O(N M J).
inline std::vector<std::vector<double>> convolve_batch(const ExpSum& K, const TimeGrid& grid,
                                                       std::span<const std::span<const double>> fs)
{
    for (const auto& f : fs)
        if (f.size() != grid.size()) throw DomainError("convolve: sample count does not match grid");
    const std::size_t M = K.size();
    const std::size_t J = fs.size();
    std::vector<double> state(J * M, 0.0);
    std::vector<double> decay(M), lag(M), lead(M);
    std::vector<std::vector<double>> out(J, std::vector<double>(grid.size(), 0.0));
    for (std::size_t n = 1; n < grid.size(); ++n) {
        const double h = grid.step(n);
        for (std::size_t m = 0; m < M; ++m) {
            const StepFactors<double> c(K.rates[m] * h);
            decay[m] = c.decay;
            lag[m] = h * c.phi2;
            lead[m] = h * (c.phi1 - c.phi2);
        }
        for (std::size_t j = 0; j < J; ++j) {
            double* E = state.data() + j * M;
            const double a = fs[j][n - 1], b = fs[j][n];
            double s = 0.0;
            for (std::size_t m = 0; m < M; ++m) {
                E[m] = decay[m] * E[m] + lag[m] * a + lead[m] * b;
                s += K.weights[m] * E[m];
            }
            out[j][n] = s + K.instant * b;
        }
    }
    return out;
}

/// Exact convolution (K_h * f)(t_n) for the piecewise-linear interpolant of f,
/// with K_h the exponential sum. O(N M).
inline std::vector<double> convolve(const ExpSum& K, const TimeGrid& grid, std::span<const double> f)
{
    const std::span<const double> one[1] = {f};
    return std::move(convolve_batch(K, grid, one).front());
}

} // namespace fmx
