#pragma once

// Modal Cauchy problems  a' = -lambda (rho * a) - b sqrt(lambda) W0,  a(0) = a0,
// solved by implicit product-integration stepping and, independently, by
// numerical inversion of the Laplace symbols on the imaginary axis.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fmx/error.hpp"
#include "fmx/kernels.hpp"
#include "fmx/parallel.hpp"
#include "fmx/params.hpp"
#include "fmx/quadrature.hpp"
#include "fmx/soe.hpp"
#include "fmx/time_grid.hpp"

namespace fmx {

using cplx = std::complex<double>;

struct ModalProblem {
    KernelParams params;
    std::vector<double> lambdas;
    std::vector<double> alpha0;
    std::vector<double> b;

    ModalProblem(KernelParams p, std::vector<double> lam, std::vector<double> a0, std::vector<double> bk)
        : params(p), lambdas(std::move(lam)), alpha0(std::move(a0)), b(std::move(bk))
    {
        validate();
    }

    void validate() const
    {
        if (lambdas.size() != alpha0.size() || lambdas.size() != b.size())
            throw DomainError("ModalProblem: lambdas, alpha0 and b must have equal length");
        for (std::size_t k = 0; k < lambdas.size(); ++k) {
            if (!(lambdas[k] > 0.0) || !std::isfinite(lambdas[k]))
                throw ValidationError("ModalProblem: eigenvalue " + std::to_string(k) + " is not positive");
            if (k > 0 && lambdas[k] < lambdas[k - 1])
                throw ValidationError("ModalProblem: eigenvalues must be nondecreasing");
            if (!std::isfinite(alpha0[k]) || !std::isfinite(b[k]))
                throw ValidationError("ModalProblem: non-finite initial coefficient at mode " + std::to_string(k));
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return lambdas.size(); }
};

/// Samples of one mode on a grid. Derivative arrays are empty until filled by
/// modal_derivatives; d2alpha[0] is NaN whenever the second derivative is
/// unbounded at t = 0.
struct ModalTrajectory {
    TimeGrid grid;
    std::size_t k = 0;
    std::vector<double> alpha;
    std::vector<double> rho_conv;
    std::vector<double> dalpha;
    std::vector<double> d2alpha;

    [[nodiscard]] bool has_derivatives() const noexcept { return !dalpha.empty(); }

    /// Local cubic interpolation of a node series at t in [0, T].
    [[nodiscard]] double interpolate(std::span<const double> v, double t) const
    {
        const std::size_t n = grid.locate(t);
        const std::size_t last = grid.size() - 1;
        std::size_t lo = n == 0 ? 0 : n - 1;
        if (lo + 3 > last) lo = last >= 3 ? last - 3 : 0;
        const std::size_t hi = std::min(last, lo + 3);
        double s = 0.0;
        for (std::size_t i = lo; i <= hi; ++i) {
            double l = 1.0;
            for (std::size_t j = lo; j <= hi; ++j)
                if (j != i) l *= (t - grid[j]) / (grid[i] - grid[j]);
            s += l * v[i];
        }
        return s;
    }

    [[nodiscard]] double alpha_at(double t) const { return interpolate(alpha, t); }
    [[nodiscard]] double rho_conv_at(double t) const { return interpolate(rho_conv, t); }
};

// ---------------------------------------------------------------------------
// Laplace symbols

namespace detail {

inline void require_off_cut(cplx s, const char* who)
{
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
        throw DomainError(std::string(who) + ": non-finite argument");
    if (s.imag() == 0.0 && s.real() <= 0.0) throw DomainError(std::string(who) + ": argument on the branch cut");
}

} // namespace detail

/// T_mu(s) = s^{1-beta}(s^alpha + 1) / (s^{2-beta}(s^alpha + 1) + mu), principal powers.
inline cplx eval_Tmu(cplx s, double mu, const KernelParams& p)
{
    detail::require_off_cut(s, "eval_Tmu");
    const cplx sa1 = std::pow(s, p.alpha()) + 1.0;
    const cplx num = std::pow(s, 1.0 - p.beta()) * sa1;
    return num / (s * num + mu);
}

/// w(s) = 1 / (s^{1-alpha}(s^alpha + 1)).
inline cplx eval_w_symbol(cplx s, const KernelParams& p)
{
    detail::require_off_cut(s, "eval_w_symbol");
    return 1.0 / (s + std::pow(s, 1.0 - p.alpha()));
}

/// (T_mu w)(s) = s^{-delta} / (s^{2-delta} + s^{2-beta} + mu).
inline cplx eval_Tmu_w(cplx s, double mu, const KernelParams& p)
{
    detail::require_off_cut(s, "eval_Tmu_w");
    const double d = p.delta();
    return std::pow(s, -d) / (std::pow(s, 2.0 - d) + std::pow(s, 2.0 - p.beta()) + mu);
}

struct BromwichOptions {
    double abs_tol = 1e-13;
    double rel_tol = 1e-11;
    /// Tail target for the truncation point Y.
    double tail_tol = 1e-13;
    double max_cutoff = 1e8;
    /// Initial truncation point, in units of the modal scale.
    double cutoff_scale = 2.0;
    int max_subdivisions = 400000;
};

struct BromwichResult {
    double value = 0.0;
    double quadrature_error = 0.0;
    double tail_estimate = 0.0;
    double imag_residue = 0.0;
    double cutoff = 0.0;
};

namespace detail {

// (1/2pi) int_{-inf}^{inf} f(iy) e^{iyt} dy for a remainder f that decays at
// least like |y|^{-2}. The two half-axes are integrated together so the
// imaginary part measures the conjugate symmetry of f.
template <class F>
BromwichResult bromwich_remainder(F&& f, double t, double singular_exponent, double scale, const BromwichOptions& opt)
{
    auto both = [&](double y) {
        const cplx e = std::polar(1.0, y * t);
        return f(cplx(0.0, y)) * e + f(cplx(0.0, -y)) * std::conj(e);
    };
    // Integration by parts beyond Y: int_Y^inf g e^{iyt} = -g(Y)e^{iYt}/(it) + g'(Y)e^{iYt}/(it)^2 - ...
    auto tail = [&](double Y, double& estimate) {
        const double dy = 1e-3 * Y;
        const cplx it(0.0, t);
        cplx total{};
        estimate = 0.0;
        for (int sign : {1, -1}) {
            auto g = [&](double y) { return f(cplx(0.0, sign * y)); };
            const cplx g0 = g(Y);
            const cplx gp = (g(Y + dy) - g(Y - dy)) / (2.0 * dy);
            const cplx gpp = (g(Y + dy) - 2.0 * g0 + g(Y - dy)) / (dy * dy);
            const cplx its = sign > 0 ? it : -it;
            const cplx e = std::polar(1.0, sign * Y * t);
            total += (-g0 / its + gp / (its * its)) * e;
            estimate += std::abs(gpp) / (t * t * t);
        }
        return total;
    };

    double Y = std::max({16.0 / t, opt.cutoff_scale * scale, 16.0});
    double estimate = 0.0;
    cplx tail_value = tail(Y, estimate);
    while (estimate > opt.tail_tol) {
        Y *= 2.0;
        if (Y > opt.max_cutoff)
            throw AccuracyError("Bromwich tail did not converge below the truncation limit", estimate);
        tail_value = tail(Y, estimate);
    }

    QuadratureSpec q;
    q.abs_tol = opt.abs_tol;
    q.rel_tol = opt.rel_tol;
    q.max_subdivisions = opt.max_subdivisions;

    // Panels of at most a quarter period of e^{iyt}.
    const double L = std::min(std::numbers::pi / (4.0 * t), Y);
    const double head = std::min(L, std::max(1.0, scale) * 1e-2);
    const cplx first = quad::integrate_left_singular(both, head, singular_exponent, q).value;
    const auto count = static_cast<std::size_t>(std::ceil((Y - head) / L));
    std::vector<double> breaks;
    breaks.reserve(count);
    for (std::size_t j = 1; j < count; ++j) breaks.push_back(head + (Y - head) * static_cast<double>(j) / count);
    const auto body = quad::integrate(both, head, Y, q, breaks);

    const cplx sum = (first + body.value + tail_value) / (2.0 * std::numbers::pi);
    BromwichResult r;
    r.value = sum.real();
    r.imag_residue = sum.imag();
    r.quadrature_error = body.error / (2.0 * std::numbers::pi);
    r.tail_estimate = estimate / (2.0 * std::numbers::pi);
    r.cutoff = Y;
    return r;
}

// Modal scale mu^{1/(2-delta)} where the symbols turn over.
inline double modal_scale(double mu, const KernelParams& p) { return std::pow(mu, 1.0 / (2.0 - p.delta())); }

} // namespace detail

/// Inverse transform of T_mu at t > 0 on the imaginary axis. The large-s part
/// 1/(s+1) + 1/(s+1)^2 is subtracted and inverted in closed form.
inline BromwichResult invert_Tmu(double t, double mu, const KernelParams& p, const BromwichOptions& opt = {})
{
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("invert_Tmu: requires t > 0");
    auto f = [&](cplx s) {
        const cplx s1 = s + 1.0;
        return eval_Tmu(s, mu, p) - 1.0 / s1 - 1.0 / (s1 * s1);
    };
    auto r = detail::bromwich_remainder(f, t, 1.0, detail::modal_scale(mu, p), opt);
    r.value += std::exp(-t) * (1.0 + t);
    return r;
}

/// Inverse transform of T_mu w at t > 0; 1/(s+1)^2 is subtracted.
inline BromwichResult invert_Tmu_w(double t, double mu, const KernelParams& p, const BromwichOptions& opt = {})
{
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("invert_Tmu_w: requires t > 0");
    auto f = [&](cplx s) {
        const cplx s1 = s + 1.0;
        return eval_Tmu_w(s, mu, p) - 1.0 / (s1 * s1);
    };
    auto r = detail::bromwich_remainder(f, t, 1.0 - p.delta(), detail::modal_scale(mu, p), opt);
    r.value += t * std::exp(-t);
    return r;
}

/// alpha_k(t) from the Laplace representation on the contour Re s = 0.
inline double alpha_k_laplace(double t, double lambda, double alpha0, double b, const KernelParams& p,
                              const BromwichOptions& opt = {})
{
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("alpha_k_laplace: requires t > 0");
    if (!(lambda > 0.0)) throw DomainError("alpha_k_laplace: requires lambda > 0");
    double v = 0.0;
    if (alpha0 != 0.0) v += alpha0 * invert_Tmu(t, lambda, p, opt).value;
    if (b != 0.0) v -= std::sqrt(lambda) * b * invert_Tmu_w(t, lambda, p, opt).value;
    return v;
}

// ---------------------------------------------------------------------------
// Volterra stepping

/// Read-only kernel data for one (params, grid) pair, shared by all modes.
class VolterraKernels {
public:
    VolterraKernels(const KernelParams& p, const TimeGrid& grid, const ExpSumOptions& opt = {})
        : params_(p), grid_(grid),
          rho_(build_exp_sum(Kernel::Rho, p, grid.horizon(), grid.min_step(), opt)),
          w0_(build_exp_sum(Kernel::W0, p, grid.horizon(), grid.min_step(), opt)),
          ealpha_(build_exp_sum(Kernel::Ealpha, p, grid.horizon(), grid.min_step(), opt))
    {
        const std::size_t n_nodes = grid.size();
        w0_nodes_.resize(n_nodes);
        rho_nodes_.assign(n_nodes, std::numeric_limits<double>::infinity());
        ealpha_nodes_.assign(n_nodes, std::numeric_limits<double>::infinity());
        w0_steps_.assign(n_nodes, 0.0);
        w0_nodes_[0] = 1.0;
        for (std::size_t n = 1; n < n_nodes; ++n) {
            const double t = grid[n];
            w0_nodes_[n] = w0_(t);
            rho_nodes_[n] = rho_(t);
            ealpha_nodes_[n] = ealpha_(t);
            const double a = grid[n - 1];
            const double h = grid.step(n);
            double s = 0.0;
            for (std::size_t m = 0; m < w0_.size(); ++m) {
                const double r = w0_.rates[m];
                s += w0_.weights[m] * std::exp(-r * a) * h * StepFactors<double>(r * h).phi1;
            }
            if (n == 1) s += w0_.instant;
            w0_steps_[n] = s;
        }
        rho_w0_ = convolve(rho_, grid, w0_nodes_);
    }

    [[nodiscard]] const KernelParams& params() const noexcept { return params_; }
    [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] const ExpSum& rho() const noexcept { return rho_; }
    [[nodiscard]] const ExpSum& w0() const noexcept { return w0_; }
    [[nodiscard]] const ExpSum& ealpha() const noexcept { return ealpha_; }
    /// W0, rho, E_alpha at the nodes (rho and E_alpha are +inf at t = 0).
    [[nodiscard]] std::span<const double> w0_nodes() const noexcept { return w0_nodes_; }
    [[nodiscard]] std::span<const double> rho_nodes() const noexcept { return rho_nodes_; }
    [[nodiscard]] std::span<const double> ealpha_nodes() const noexcept { return ealpha_nodes_; }
    /// int_{t_{n-1}}^{t_n} W0, index n >= 1.
    [[nodiscard]] std::span<const double> w0_steps() const noexcept { return w0_steps_; }
    /// (rho * W0)(t_n).
    [[nodiscard]] std::span<const double> rho_w0() const noexcept { return rho_w0_; }

private:
    KernelParams params_;
    TimeGrid grid_;
    ExpSum rho_;
    ExpSum w0_;
    ExpSum ealpha_;
    std::vector<double> w0_nodes_;
    std::vector<double> rho_nodes_;
    std::vector<double> ealpha_nodes_;
    std::vector<double> w0_steps_;
    std::vector<double> rho_w0_;
};

struct VolterraOptions {
    std::size_t block = 64;
    std::size_t threads = 0;
    /// Combine the grid with its 2x refinement to cancel the O(h^2) error.
    bool richardson = true;
    ExpSumOptions kernels{};
};

namespace detail {

// Steps a block of modes together; per-step kernel factors are shared.
inline void volterra_block(const VolterraKernels& K, std::span<const double> lambda, std::span<const double> a0,
                           std::span<const double> b, std::span<ModalTrajectory> out)
{
    const TimeGrid& grid = K.grid();
    const ExpSum& rho = K.rho();
    const std::size_t M = rho.size();
    const std::size_t J = lambda.size();
    const double G = rho.instant;

    std::vector<double> state(J * M, 0.0);
    std::vector<double> decay_w(M), decay(M), lag(M), lead(M);
    std::vector<double> sqrt_lambda(J);
    for (std::size_t j = 0; j < J; ++j) {
        sqrt_lambda[j] = std::sqrt(lambda[j]);
        out[j].alpha.assign(grid.size(), 0.0);
        out[j].rho_conv.assign(grid.size(), 0.0);
        out[j].alpha[0] = a0[j];
    }

    // Memory states are advanced exactly for linear alpha on each step; the
    // increment of alpha uses the trapezoid rule on rho * alpha, which keeps
    // the slow, spring-like part of the memory neutrally stable at any step.
    for (std::size_t n = 1; n < grid.size(); ++n) {
        const double h = grid.step(n);
        double sum_lag = 0.0;
        double sum_lead = G;
        for (std::size_t m = 0; m < M; ++m) {
            const StepFactors<double> f(rho.rates[m] * h);
            const double w = rho.weights[m];
            decay[m] = f.decay;
            decay_w[m] = w * f.decay;
            lag[m] = h * f.phi2;
            lead[m] = h * (f.phi1 - f.phi2);
            sum_lag += w * lag[m];
            sum_lead += w * lead[m];
        }
        const double dW = K.w0_steps()[n];
        for (std::size_t j = 0; j < J; ++j) {
            double* E = state.data() + j * M;
            double carried = 0.0;
            for (std::size_t m = 0; m < M; ++m) carried += decay_w[m] * E[m];
            const double prev = out[j].alpha[n - 1];
            const double c = 0.5 * lambda[j] * h;
            const double next = (prev * (1.0 - c * sum_lag) - c * (out[j].rho_conv[n - 1] + carried)
                                 - b[j] * sqrt_lambda[j] * dW)
                                / (1.0 + c * sum_lead);
            double conv = 0.0;
            for (std::size_t m = 0; m < M; ++m) {
                E[m] = decay[m] * E[m] + lag[m] * prev + lead[m] * next;
                conv += rho.weights[m] * E[m];
            }
            conv += G * next;
            if (!std::isfinite(next) || !std::isfinite(conv))
                throw NumericError("Volterra step produced a non-finite value for mode " + std::to_string(out[j].k), n);
            out[j].alpha[n] = next;
            out[j].rho_conv[n] = conv;
        }
    }
}

} // namespace detail

/// Implicit product-integration solver for the modal Volterra equations on a grid.
class VolterraSolver {
public:
    VolterraSolver(const KernelParams& p, const TimeGrid& grid, const VolterraOptions& opt = {})
        : opt_(opt), coarse_(p, grid, opt.kernels)
    {
        if (opt.richardson) fine_.emplace_back(p, grid.refined(2), opt.kernels);
    }

    [[nodiscard]] const VolterraKernels& kernels() const noexcept { return coarse_; }
    [[nodiscard]] const TimeGrid& grid() const noexcept { return coarse_.grid(); }
    [[nodiscard]] const VolterraOptions& options() const noexcept { return opt_; }

    /// Trajectories of the selected modes, stepped in parallel blocks.
    [[nodiscard]] std::vector<ModalTrajectory> solve(const ModalProblem& problem, std::span<const std::size_t> modes) const
    {
        if (!(problem.params == coarse_.params()))
            throw DomainError("alpha_k_volterra: solver built for other kernel parameters");
        std::vector<double> lam, a0, b;
        for (std::size_t k : modes) {
            if (k >= problem.size()) throw DomainError("alpha_k_volterra: mode index out of range");
            lam.push_back(problem.lambdas[k]);
            a0.push_back(problem.alpha0[k]);
            b.push_back(problem.b[k]);
        }
        std::vector<ModalTrajectory> out = run(coarse_, modes, lam, a0, b);
        if (!fine_.empty()) {
            const std::vector<ModalTrajectory> fine = run(fine_.front(), modes, lam, a0, b);
            for (std::size_t i = 0; i < out.size(); ++i) {
                for (std::size_t n = 1; n < out[i].alpha.size(); ++n) {
                    out[i].alpha[n] = (4.0 * fine[i].alpha[2 * n] - out[i].alpha[n]) / 3.0;
                    out[i].rho_conv[n] = (4.0 * fine[i].rho_conv[2 * n] - out[i].rho_conv[n]) / 3.0;
                }
            }
        }
        return out;
    }

    [[nodiscard]] std::vector<ModalTrajectory> solve_all(const ModalProblem& problem) const
    {
        std::vector<std::size_t> modes(problem.size());
        for (std::size_t k = 0; k < modes.size(); ++k) modes[k] = k;
        return solve(problem, modes);
    }

private:
    std::vector<ModalTrajectory> run(const VolterraKernels& K, std::span<const std::size_t> modes,
                                     const std::vector<double>& lam, const std::vector<double>& a0,
                                     const std::vector<double>& b) const
    {
        std::vector<ModalTrajectory> out;
        out.reserve(modes.size());
        for (std::size_t k : modes) out.push_back(ModalTrajectory{K.grid(), k, {}, {}, {}, {}});
        const std::size_t block = std::max<std::size_t>(1, opt_.block);
        const std::size_t blocks = (modes.size() + block - 1) / block;
        parallel_for(
            blocks,
            [&](std::size_t i) {
                const std::size_t lo = i * block;
                const std::size_t len = std::min(block, modes.size() - lo);
                detail::volterra_block(K, std::span(lam).subspan(lo, len), std::span(a0).subspan(lo, len),
                                       std::span(b).subspan(lo, len), std::span(out).subspan(lo, len));
            },
            opt_.threads);
        return out;
    }

    VolterraOptions opt_;
    VolterraKernels coarse_;
    std::vector<VolterraKernels> fine_;
};

inline ModalTrajectory alpha_k_volterra(const ModalProblem& problem, std::size_t k, const TimeGrid& grid,
                                        const VolterraOptions& opt = {})
{
    const VolterraSolver solver(problem.params, grid, opt);
    const std::size_t modes[1] = {k};
    return std::move(solver.solve(problem, modes).front());
}

/// rho * (rho * alpha_k) at the nodes for every trajectory.
inline std::vector<std::vector<double>> rho_rho_alpha(std::span<const ModalTrajectory> traj, const VolterraKernels& K)
{
    std::vector<std::span<const double>> series;
    for (const ModalTrajectory& tr : traj) {
        if (tr.rho_conv.size() != K.grid().size() || tr.grid.steps() != K.grid().steps() ||
            tr.grid.horizon() != K.grid().horizon())
            throw DomainError("modal_derivatives: trajectory and kernel table use different grids");
        series.emplace_back(tr.rho_conv);
    }
    return convolve_batch(K.rho(), K.grid(), series);
}

/// Fills dalpha from the modal equation and d2alpha from
/// a'' = -lambda rho(t) a0 + lambda^2 (rho*rho*a) + lambda^{3/2} b (rho*W0) + sqrt(lambda) b E_alpha,
/// given rr = rho*rho*a at the nodes.
inline void modal_derivatives(ModalTrajectory& traj, const ModalProblem& problem, const VolterraKernels& K,
                              std::span<const double> rr)
{
    const std::size_t k = traj.k;
    if (k >= problem.size()) throw DomainError("modal_derivatives: mode index out of range");
    if (traj.alpha.size() != K.grid().size() || rr.size() != K.grid().size())
        throw DomainError("modal_derivatives: trajectory and kernel table use different grids");
    const double lam = problem.lambdas[k];
    const double sl = std::sqrt(lam);
    const double a0 = problem.alpha0[k];
    const double b = problem.b[k];
    const std::size_t N = traj.alpha.size();
    auto w0 = K.w0_nodes();
    traj.dalpha.resize(N);
    for (std::size_t n = 0; n < N; ++n) traj.dalpha[n] = -lam * traj.rho_conv[n] - b * sl * w0[n];

    auto rho = K.rho_nodes();
    auto ea = K.ealpha_nodes();
    auto rw = K.rho_w0();
    traj.d2alpha.resize(N);
    traj.d2alpha[0] = (a0 != 0.0 || b != 0.0) ? std::numeric_limits<double>::quiet_NaN() : 0.0;
    for (std::size_t n = 1; n < N; ++n)
        traj.d2alpha[n] = -lam * rho[n] * a0 + lam * lam * rr[n] + lam * sl * b * rw[n] + sl * b * ea[n];
}

inline void modal_derivatives(ModalTrajectory& traj, const ModalProblem& problem, const VolterraKernels& K)
{
    const std::vector<std::vector<double>> rr = rho_rho_alpha(std::span(&traj, 1), K);
    modal_derivatives(traj, problem, K, rr.front());
}

/// Second derivative at node n, rejecting t = 0 when it is unbounded there.
inline double d2alpha_at_node(const ModalTrajectory& traj, std::size_t n)
{
    if (!traj.has_derivatives()) throw DomainError("d2alpha_at_node: derivatives not computed");
    if (n >= traj.d2alpha.size()) throw DomainError("d2alpha_at_node: node out of range");
    if (std::isnan(traj.d2alpha[n]))
        throw DomainError("second modal derivative is unbounded at t = 0 (W0' ~ t^(alpha-1))");
    return traj.d2alpha[n];
}

} // namespace fmx
