#pragma once

// Adaptive Gauss-Kronrod integration on finite intervals and on the half
// line, plus composite Gauss-Legendre rules used to discretize spectral
// kernel representations.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <queue>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

#include "fmx/error.hpp"
#include "fmx/params.hpp"

namespace fmx::quad {

template <class T>
struct Result {
    T value{};
    double error = 0.0;
    int evaluations = 0;
    int subdivisions = 0;
};

namespace detail {

// QUADPACK qk21 abscissae and weights.
inline constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
inline constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208980529543, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

template <class T>
struct Panel {
    double a;
    double b;
    T value;
    double error;
};

// One 21-point Kronrod panel with the QUADPACK error heuristic.
template <class T, class F>
Panel<T> kronrod21(F& f, double a, double b)
{
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const T fc = f(center);
    T resg{};
    T resk = fc * kWgk[10];
    double resabs = std::abs(fc) * kWgk[10];
    std::array<T, 10> f1{};
    std::array<T, 10> f2{};
    for (std::size_t j = 0; j < 10; ++j) {
        const double dx = half * kXgk[j];
        f1[j] = f(center - dx);
        f2[j] = f(center + dx);
        const T sum = f1[j] + f2[j];
        resk += kWgk[j] * sum;
        resabs += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
        if (j % 2 == 1) resg += kWg[j / 2] * sum;
    }
    const T mean = resk * 0.5;
    double resasc = kWgk[10] * std::abs(fc - mean);
    for (std::size_t j = 0; j < 10; ++j) resasc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));

    const double scale = std::abs(half);
    resk *= half;
    resg *= half;
    resabs *= scale;
    resasc *= scale;
    double err = std::abs(resk - resg);
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    constexpr double tiny = std::numeric_limits<double>::min();
    if (resabs > tiny / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
    return {a, b, resk, err};
}

} // namespace detail

/// Globally adaptive 21-point Gauss-Kronrod quadrature of f over [a, b].
///
/// `breakpoints` (sorted, strictly inside (a, b)) seed the initial partition.
/// Throws AccuracyError when the tolerance max(abs_tol, rel_tol*|I|) is not
/// met within spec.max_subdivisions bisections.
template <class F, class T = std::invoke_result_t<F&, double>>
Result<T> integrate(F&& f, double a, double b, const QuadratureSpec& spec, std::span<const double> breakpoints = {})
{
    spec.validate();
    Result<T> out;
    if (a == b) return out;

    auto counted = [&](double x) -> T {
        ++out.evaluations;
        return f(x);
    };

    // Panels live in `store`; the heap orders live panel indices by error.
    std::vector<detail::Panel<T>> store;
    std::vector<char> live;
    using Entry = std::pair<double, std::size_t>;
    std::priority_queue<Entry> heap;
    T total{};
    double total_err = 0.0;
    auto add = [&](const detail::Panel<T>& p) {
        store.push_back(p);
        live.push_back(1);
        heap.emplace(p.error, store.size() - 1);
        total += p.value;
        total_err += p.error;
    };
    double lo = a;
    for (double bp : breakpoints) {
        if (bp <= lo || bp >= b) continue;
        add(detail::kronrod21<T>(counted, lo, bp));
        lo = bp;
    }
    add(detail::kronrod21<T>(counted, lo, b));

    while (total_err > std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) {
        if (heap.empty()) break;
        if (out.subdivisions >= spec.max_subdivisions) {
            throw AccuracyError("adaptive quadrature did not converge within max_subdivisions", total_err);
        }
        const std::size_t idx = heap.top().second;
        heap.pop();
        const auto worst = store[idx];
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) continue; // exhausted at machine resolution
        live[idx] = 0;
        total -= worst.value;
        total_err -= worst.error;
        add(detail::kronrod21<T>(counted, worst.a, mid));
        add(detail::kronrod21<T>(counted, mid, worst.b));
        ++out.subdivisions;
        if (out.subdivisions % 64 == 0) {
            // Refresh the running sums to keep cancellation error bounded.
            total = T{};
            total_err = 0.0;
            for (std::size_t i = 0; i < store.size(); ++i) {
                if (!live[i]) continue;
                total += store[i].value;
                total_err += store[i].error;
            }
        }
    }

    // Final sum in left-to-right order so results do not depend on heap layout.
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < store.size(); ++i)
        if (live[i]) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return store[x].a < store[y].a; });
    out.value = T{};
    out.error = 0.0;
    for (std::size_t i : order) {
        out.value += store[i].value;
        out.error += store[i].error;
    }
    if (!std::isfinite(std::abs(out.value))) throw AccuracyError("quadrature produced a non-finite value", out.error);
    return out;
}

/// Integral of f over (0, inf).
///
/// Uses r = scale * v^(1/e), v = u/(1-u) with e = spec.endpoint_exponent, so
/// an r^(e-1) endpoint singularity becomes a bounded integrand in u on (0, 1).
template <class F, class T = std::invoke_result_t<F&, double>>
Result<T> integrate_half_line(F&& f, const QuadratureSpec& spec, double scale = 1.0)
{
    const double e = spec.endpoint_exponent;
    const double inv_e = 1.0 / e;
    auto mapped = [&](double u) -> T {
        const double one_minus = 1.0 - u;
        if (one_minus <= 0.0) return T{};
        const double v = u / one_minus;
        const double r = scale * std::pow(v, inv_e);
        const double jac = scale * inv_e * std::pow(v, inv_e - 1.0) / (one_minus * one_minus);
        if (r == 0.0 || jac == 0.0 || !std::isfinite(r) || !std::isfinite(jac)) return T{};
        return f(r) * jac;
    };
    return integrate(mapped, 0.0, 1.0, spec);
}

/// Integral over [0, b] of an integrand behaving like x^(e-1) at 0, via x = b * v^(1/e).
template <class F, class T = std::invoke_result_t<F&, double>>
Result<T> integrate_left_singular(F&& f, double b, double e, const QuadratureSpec& spec)
{
    const double inv_e = 1.0 / e;
    auto mapped = [&](double v) -> T {
        const double x = b * std::pow(v, inv_e);
        const double jac = b * inv_e * std::pow(v, inv_e - 1.0);
        if (x == 0.0 || jac == 0.0) return T{};
        return f(x) * jac;
    };
    return integrate(mapped, 0.0, 1.0, spec);
}

/// n-point Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendre(std::size_t n) : nodes(n), weights(n)
    {
        if (n == 0) throw DomainError("Gauss-Legendre rule needs at least one node");
        const std::size_t m = (n + 1) / 2;
        for (std::size_t i = 0; i < m; ++i) {
            double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0;
                double p1 = 0.0;
                for (std::size_t j = 1; j <= n; ++j) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / static_cast<double>(j);
                }
                dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
                const double dz = p0 / dp;
                z -= dz;
                if (std::abs(dz) < 1e-16) break;
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
    }
};

} // namespace fmx::quad
