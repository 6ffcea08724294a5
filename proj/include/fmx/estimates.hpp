#pragma once

// Empirical constants for the decay and boundedness estimates: each case is a
// ratio lhs/rhs swept over a log-spaced probe lattice in t and over modes,
// repeated at doubled resolution to measure drift.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fmx/error.hpp"
#include "fmx/field.hpp"
#include "fmx/kernels.hpp"
#include "fmx/modal.hpp"
#include "fmx/parallel.hpp"
#include "fmx/params.hpp"
#include "fmx/quadrature.hpp"
#include "fmx/time_grid.hpp"

namespace fmx {

struct SlopeFit {
    double fitted = 0.0;
    double predicted = 0.0;
    double r2 = 0.0;
};

struct EstimateReport {
    std::string name;
    double empirical_M = 0.0;
    double arg_sup_t = std::numeric_limits<double>::quiet_NaN();
    std::size_t arg_sup_k = 0;
    double refinement_drift = 0.0;
    /// Relative change of M when only the probe density doubles; informational.
    std::optional<double> density_drift;
    std::optional<SlopeFit> slope_fit;
    /// Data behind slope_fit.
    std::vector<double> sample_x, sample_y;
    bool passed = false;
    std::string note;
};

struct ProbeSettings {
    double t_min = 1e-3;
    double t_max = 1e3;
    std::size_t points = 31;
    double drift_limit = 0.05;
    double slope_tolerance = 0.10;
    double min_r2 = 0.98;
};

/// n log-spaced points from lo to hi inclusive.
inline std::vector<double> log_lattice(double lo, double hi, std::size_t n)
{
    if (!(lo > 0.0 && hi > lo) || n < 2) throw DomainError("log_lattice: need 0 < lo < hi and n >= 2");
    std::vector<double> t(n);
    const double a = std::log(lo);
    const double d = (std::log(hi) - a) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) t[i] = std::exp(a + d * static_cast<double>(i));
    t.front() = lo;
    t.back() = hi;
    return t;
}

/// Least-squares line through (log x, log y).
inline SlopeFit fit_loglog(std::span<const double> x, std::span<const double> y, double predicted)
{
    if (x.size() != y.size() || x.size() < 2) throw DomainError("fit_loglog: need two or more matching points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0)) throw DomainError("fit_loglog: data must be positive");
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double icpt = (sy - slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double ly = std::log(y[i]);
        const double e = ly - (icpt + slope * std::log(x[i]));
        ss_res += e * e;
        ss_tot += (ly - sy / n) * (ly - sy / n);
    }
    return {slope, predicted, ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0};
}

inline bool slope_ok(const SlopeFit& f, const ProbeSettings& s)
{
    return std::abs(f.fitted - f.predicted) <= s.slope_tolerance * std::abs(f.predicted) && f.r2 >= s.min_r2;
}

/// Running supremum of lhs/rhs. 0/0 is skipped; lhs > 0 with rhs = 0 is +inf.
struct RatioSup {
    double M = 0.0;
    double t = std::numeric_limits<double>::quiet_NaN();
    std::size_t k = 0;

    void add(double lhs, double rhs, double tt, std::size_t kk)
    {
        double r;
        if (lhs == 0.0) return;
        if (!(rhs > 0.0) || !std::isfinite(lhs))
            r = std::numeric_limits<double>::infinity();
        else
            r = lhs / rhs;
        if (r > M || std::isnan(t)) {
            M = r;
            t = tt;
            k = kk;
        }
    }
};

inline double relative_change(double base, double other)
{
    if (base == other) return 0.0;
    if (base == 0.0 || !std::isfinite(base) || !std::isfinite(other)) return std::numeric_limits<double>::infinity();
    return std::abs(other - base) / std::abs(base);
}

// ---------------------------------------------------------------------------
// Parameterized cases

enum class Family { Sot1, Sxl3, Soc, Ut22, Ie1, Smoothness };

struct EstimateCase {
    std::string name;
    Family family = Family::Sot1;
    std::string variant;
    double gamma = 0.0;
    double theta = 0.0;
    double mu = 0.0;
    double tau = 0.0;
    double chi = 0.0;

    void validate() const
    {
        auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
        bool ok = true;
        switch (family) {
        case Family::Sot1:
            ok = (variant == "i" || variant == "ii") || ((variant == "iii" || variant == "iv") && unit(mu) && unit(tau));
            break;
        case Family::Sxl3:
        case Family::Soc:
            ok = (variant == "i" || variant == "ii") && gamma >= 0.0 && gamma <= theta && theta <= gamma + 1.0;
            break;
        case Family::Ut22: ok = gamma >= 0.0; break;
        case Family::Ie1: ok = (variant == "a" && unit(chi)) || (variant == "b" && unit(tau)); break;
        case Family::Smoothness: ok = (variant == "first" || variant == "stress") && gamma >= 0.0; break;
        }
        if (!ok) throw ValidationError("estimate case '" + name + "' has parameters outside its stated range");
    }
};

namespace detail {

inline std::string fmt_param(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

} // namespace detail

/// Every in-range case exercised by the default suite.
inline std::vector<EstimateCase> default_cases(const KernelParams& p)
{
    using detail::fmt_param;
    const double w = p.omega();
    std::vector<EstimateCase> out;
    out.push_back({"sot1.i", Family::Sot1, "i"});
    out.push_back({"sot1.ii", Family::Sot1, "ii"});
    for (const char* v : {"iii", "iv"})
        for (double mu : {0.0, 0.5, 1.0})
            for (double tau : {0.0, 0.5, 1.0}) {
                EstimateCase c{std::string("sot1.") + v + "[mu=" + fmt_param(mu) + ",tau=" + fmt_param(tau) + "]",
                               Family::Sot1, v};
                c.mu = mu;
                c.tau = tau;
                out.push_back(c);
            }
    const std::vector<std::pair<double, double>> pairs = {{0.0, 0.0}, {0.0, w},   {0.0, 0.5},     {0.0, 1.0},
                                                          {0.5, 0.5 + w}, {0.5, 1.5}, {1.0, 1.0}, {1.0, 2.0}};
    for (Family f : {Family::Sxl3, Family::Soc})
        for (const char* v : {"i", "ii"})
            for (auto [g, th] : pairs) {
                EstimateCase c{std::string(f == Family::Sxl3 ? "sxl3." : "soc.") + v + "[gamma=" + fmt_param(g) +
                                   ",theta=" + fmt_param(th) + "]",
                               f, v};
                c.gamma = g;
                c.theta = th;
                out.push_back(c);
            }
    for (double g : {0.0, 0.5, 1.0}) {
        EstimateCase c{"ut22[gamma=" + fmt_param(g) + "]", Family::Ut22, ""};
        c.gamma = g;
        out.push_back(c);
    }
    for (double x : {0.0, 0.5, 1.0}) {
        EstimateCase a{"ie1.a[chi=" + fmt_param(x) + "]", Family::Ie1, "a"};
        a.chi = x;
        out.push_back(a);
        EstimateCase b{"ie1.b[tau=" + fmt_param(x) + "]", Family::Ie1, "b"};
        b.tau = x;
        out.push_back(b);
    }
    for (const char* v : {"first", "stress"})
        for (double g : {0.0, 0.5, 1.0}) {
            EstimateCase c{std::string("smoothness.") + v + "[gamma=" + fmt_param(g) + "]", Family::Smoothness, v};
            c.gamma = g;
            out.push_back(c);
        }
    return out;
}

// ---------------------------------------------------------------------------
// Shared solves

/// Trajectories of one problem at one resolution, with derivative data.
struct ModalRun {
    TimeGrid grid{1.0, 1};
    std::vector<ModalTrajectory> traj;
    /// (rho * alpha_k')(t_n) per mode.
    std::vector<std::vector<double>> rho_dalpha;
};

inline ModalRun solve_modal_run(const ModalProblem& problem, const TimeGrid& grid, const VolterraOptions& opt = {})
{
    const VolterraSolver solver(problem.params, grid, opt);
    ModalRun run{grid, solver.solve_all(problem), {}};
    const VolterraKernels& K = solver.kernels();
    const std::vector<std::vector<double>> rr = rho_rho_alpha(run.traj, K);
    run.rho_dalpha.resize(problem.size());
    auto rw = K.rho_w0();
    for (std::size_t k = 0; k < problem.size(); ++k) {
        modal_derivatives(run.traj[k], problem, K, rr[k]);
        const double lam = problem.lambdas[k];
        const double sb = std::sqrt(lam) * problem.b[k];
        std::vector<double>& out = run.rho_dalpha[k];
        out.resize(grid.size());
        for (std::size_t n = 0; n < grid.size(); ++n) out[n] = -lam * rr[k][n] - sb * rw[n];
    }
    return run;
}

struct StudyGrid {
    std::size_t steps = 2000;
    double grading = 3.0;
};

/// A problem solved on [0, T] with N steps and on [0, 2T] with 2N steps.
/// The probe lattice covers [t_min, T]; the refined lattice continues it with
/// the same spacing up to 2T, and the dense lattice doubles its point density.
class Study {
public:
    Study(ModalProblem problem, const ProbeSettings& probe = {}, const StudyGrid& grid = {},
          const VolterraOptions& opt = {})
        : problem_(std::move(problem)), probe_(probe)
    {
        const double T = probe.t_max;
        base_ = solve_modal_run(problem_, TimeGrid(T, grid.steps, grid.grading), opt);
        refined_ = solve_modal_run(problem_, TimeGrid(2.0 * T, 2 * grid.steps, grid.grading), opt);
        lattice_ = log_lattice(probe.t_min, T, probe.points);
        dense_lattice_ = log_lattice(probe.t_min, T, 2 * probe.points - 1);
        refined_lattice_ = lattice_;
        const double ratio = lattice_[1] / lattice_[0];
        for (double t = T * ratio; t < 2.0 * T * (1.0 - 1e-12); t *= ratio) refined_lattice_.push_back(t);
        refined_lattice_.push_back(2.0 * T);
    }

    [[nodiscard]] const ModalProblem& problem() const noexcept { return problem_; }
    [[nodiscard]] const ProbeSettings& probe() const noexcept { return probe_; }
    [[nodiscard]] const ModalRun& base() const noexcept { return base_; }
    [[nodiscard]] const ModalRun& refined() const noexcept { return refined_; }
    [[nodiscard]] std::span<const double> lattice() const noexcept { return lattice_; }
    [[nodiscard]] std::span<const double> refined_lattice() const noexcept { return refined_lattice_; }
    [[nodiscard]] std::span<const double> dense_lattice() const noexcept { return dense_lattice_; }

private:
    ModalProblem problem_;
    ProbeSettings probe_;
    ModalRun base_, refined_;
    std::vector<double> lattice_, refined_lattice_, dense_lattice_;
};

/// Values of one mode at time t.
struct ModalSample {
    double t;
    double lambda;
    double alpha0;
    double b;
    double alpha;
    double rho_conv;
    double dalpha;
    double rho_dalpha;
};

namespace detail {

template <class Ratio>
RatioSup sweep_modes(const ModalProblem& P, const ModalRun& run, std::span<const double> times, Ratio&& ratio)
{
    RatioSup sup;
    for (std::size_t k = 0; k < P.size(); ++k) {
        const ModalTrajectory& tr = run.traj[k];
        for (double t : times) {
            const ModalSample s{t,
                                P.lambdas[k],
                                P.alpha0[k],
                                P.b[k],
                                tr.alpha_at(t),
                                tr.rho_conv_at(t),
                                tr.interpolate(tr.dalpha, t),
                                tr.interpolate(run.rho_dalpha[k], t)};
            const auto [lhs, rhs] = ratio(s);
            sup.add(lhs, rhs, t, k);
        }
    }
    return sup;
}

inline EstimateReport finish(std::string name, const RatioSup& base, const RatioSup& refined, const RatioSup& dense,
                             const ProbeSettings& probe)
{
    EstimateReport r;
    r.name = std::move(name);
    r.empirical_M = base.M;
    r.arg_sup_t = base.t;
    r.arg_sup_k = base.k;
    r.refinement_drift = relative_change(base.M, refined.M);
    r.density_drift = relative_change(base.M, dense.M);
    r.passed = std::isfinite(base.M) && r.refinement_drift <= probe.drift_limit;
    if (!std::isfinite(base.M)) r.note = "ratio unbounded on the probe lattice";
    else if (!r.passed) r.note = "refinement drift above limit";
    return r;
}

template <class Ratio>
EstimateReport modal_report(const std::string& name, const Study& st, Ratio&& ratio)
{
    const ModalProblem& P = st.problem();
    if (P.size() == 0 || st.lattice().empty()) throw DomainError("estimate '" + name + "': empty probe set");
    return finish(name, sweep_modes(P, st.base(), st.lattice(), ratio),
                  sweep_modes(P, st.refined(), st.refined_lattice(), ratio),
                  sweep_modes(P, st.refined(), st.dense_lattice(), ratio), st.probe());
}

inline double positive_part(double x) { return x > 0.0 ? x : 0.0; }

inline void require_family(const EstimateCase& c, Family f, const char* who)
{
    c.validate();
    if (c.family != f) throw DomainError(std::string(who) + ": case '" + c.name + "' belongs to another family");
}

} // namespace detail

/// Bounds on |alpha_k| and lambda_k |rho * alpha_k|^2 in terms of the data.
inline EstimateReport check_sot1(const Study& st, const EstimateCase& c)
{
    detail::require_family(c, Family::Sot1, "check_sot1");
    const KernelParams& p = st.problem().params;
    const double d = p.delta(), w = p.omega();
    const double mu = c.mu, tau = c.tau;
    return detail::modal_report(c.name, st, [&](const ModalSample& s) -> std::pair<double, double> {
        const double a2 = s.alpha * s.alpha, A = s.alpha0 * s.alpha0, B = s.b * s.b;
        const double l = s.lambda, t = s.t;
        if (c.variant == "i") return {a2, A + std::pow(l, -w) * B};
        if (c.variant == "ii") return {l * a2, A / std::pow(t, 2.0 - d) + B / std::pow(t, 2.0 - 2.0 * d)};
        if (c.variant == "iii")
            return {a2, A / (std::pow(l, mu) * std::pow(t, mu * (2.0 - d))) +
                            B / (std::pow(l, tau + (1.0 - tau) * w) * std::pow(t, 2.0 * tau * (1.0 - d)))};
        const double lhs = l * s.rho_conv * s.rho_conv;
        return {lhs, A / (std::pow(l, mu - 1.0) * std::pow(t, mu * (2.0 - d) + 2.0 * (d - 1.0))) +
                         B / (std::pow(l, -(1.0 - tau) * (1.0 - w)) * std::pow(t, -2.0 * (1.0 - tau) * (1.0 - d)))};
    });
}

/// H_theta and D_gamma weighted forms of the modal bounds.
inline EstimateReport check_sxl3(const Study& st, const EstimateCase& c)
{
    detail::require_family(c, Family::Sxl3, "check_sxl3");
    const KernelParams& p = st.problem().params;
    const double d = p.delta(), w = p.omega();
    const double g = c.gamma, th = c.theta;
    const double e_i = 2.0 * (1.0 - d) * detail::positive_part((th - g - w) / (1.0 - w));
    const double e_ii = d * (th - g - w) / w;
    return detail::modal_report(c.name, st, [&](const ModalSample& s) -> std::pair<double, double> {
        const double A = s.alpha0 * s.alpha0, B = s.b * s.b;
        const double lt = std::pow(s.lambda, th), lg = std::pow(s.lambda, g);
        if (c.variant == "i") return {lt * s.alpha * s.alpha, lt * A + lg * B / std::pow(s.t, e_i)};
        return {lg * s.lambda * s.rho_conv * s.rho_conv, lt * A * std::pow(s.t, e_ii) + lg * B};
    });
}

/// Bounds on the derivatives: lambda^gamma |alpha'|^2 and the stress-rate
/// term |lambda^{gamma/2} sqrt(lambda) (rho * alpha')|^2.
inline EstimateReport check_smoothness(const Study& st, const EstimateCase& c)
{
    detail::require_family(c, Family::Smoothness, "check_smoothness");
    const KernelParams& p = st.problem().params;
    const double d = p.delta(), w = p.omega(), g = c.gamma;
    // Any omega_t in (0, omega) is admissible; the midpoint is used.
    const double wt = 0.5 * w;
    const double dt = 2.0 * wt / (1.0 + wt);
    const double a = 1.0 - 2.0 * d + (d - dt) / (2.0 - dt);
    const double bb = 1.0 - d;
    return detail::modal_report(c.name, st, [&](const ModalSample& s) -> std::pair<double, double> {
        const double A = s.alpha0 * s.alpha0, B = s.b * s.b, l = s.lambda;
        if (c.variant == "first")
            return {std::pow(l, g) * s.dalpha * s.dalpha, std::pow(l, 1.0 + g + w) * A + std::pow(l, 1.0 + g) * B};
        const double v = std::pow(l, 0.5 * g) * std::sqrt(l) * s.rho_dalpha;
        return {v * v, std::pow(l, 2.0 + g - wt) * A * std::pow(s.t, 2.0 * a) + std::pow(l, 2.0 + g) * std::pow(s.t, 2.0 * bb) * B};
    });
}

/// Probe problem: every lambda paired with data (1, 0), (0, 1) and (1, 1).
inline ModalProblem probe_problem(const KernelParams& p, std::span<const double> lambdas = {})
{
    static const double defaults[] = {1.0, 10.0, 100.0, 1000.0};
    if (lambdas.empty()) lambdas = defaults;
    std::vector<double> lam, a0, b;
    for (double l : lambdas)
        for (auto [x, y] : {std::pair{1.0, 0.0}, std::pair{0.0, 1.0}, std::pair{1.0, 1.0}}) {
            lam.push_back(l);
            a0.push_back(x);
            b.push_back(y);
        }
    return ModalProblem(p, lam, a0, b);
}

// ---------------------------------------------------------------------------
// Field-level cases

/// Initial data in coefficient form: velocity coefficients and the S0 decomposition.
struct InitialData {
    std::vector<double> u0;
    StressDecomposition s0;
};

/// Named presets on a spectrum. "smooth": coefficients lambda_k^{-1} k^{-1/2};
/// "random": Gaussian coefficients scaled by lambda_k^{-1} k^{-1/2}, fixed seed.
inline InitialData initial_data_preset(const std::string& name, std::span<const double> lambdas, std::uint64_t seed = 7)
{
    const std::size_t K = lambdas.size();
    InitialData d{std::vector<double>(K), {std::vector<double>(K), std::vector<double>(K), 0.1}};
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    for (std::size_t k = 0; k < K; ++k) {
        const double s = 1.0 / (lambdas[k] * std::sqrt(static_cast<double>(k + 1)));
        if (name == "smooth") {
            d.u0[k] = s;
            d.s0.a[k] = 0.5 * s;
            d.s0.a_t[k] = 0.25 * s;
        } else if (name == "random") {
            d.u0[k] = s * normal(rng);
            d.s0.a[k] = s * normal(rng);
            d.s0.a_t[k] = s * normal(rng);
        } else if (name == "velocity") {
            d.u0[k] = s;
        } else if (name == "stress") {
            d.s0.a[k] = s;
            d.s0.a_t[k] = 0.5 * s;
        } else {
            throw ValidationError("unknown initial data preset '" + name + "'");
        }
    }
    if (name == "velocity") d.s0.remainder = 0.0;
    return d;
}

/// A modal study over a whole spectrum plus the S0 decomposition it came from.
class FieldStudy {
public:
    FieldStudy(const KernelParams& p, std::vector<double> lambdas, InitialData data, const ProbeSettings& probe = {},
               const StudyGrid& grid = {}, const VolterraOptions& opt = {})
        : data_(std::move(data)),
          study_(project_initial_data(p, lambdas, data_.u0, data_.s0), probe, grid, opt)
    {
        w0_cache(study_.lattice(), w0_base_);
        w0_cache(study_.refined_lattice(), w0_refined_);
        w0_cache(study_.dense_lattice(), w0_dense_);
    }

    [[nodiscard]] const Study& study() const noexcept { return study_; }
    [[nodiscard]] const InitialData& data() const noexcept { return data_; }
    [[nodiscard]] const std::vector<double>& w0(int which) const
    {
        return which == 0 ? w0_base_ : which == 1 ? w0_refined_ : w0_dense_;
    }

private:
    void w0_cache(std::span<const double> ts, std::vector<double>& out)
    {
        out.clear();
        for (double t : ts) out.push_back(eval_W0(t, study_.problem().params));
    }

    InitialData data_;
    Study study_;
    std::vector<double> w0_base_, w0_refined_, w0_dense_;
};

/// Fields at time t from one run; W0(t) supplied by the caller.
inline std::pair<VelocityField, StressField> fields_at(const ModalProblem& P, const ModalRun& run, const StressDecomposition& s0,
                                                       double t, double w0)
{
    VelocityField u{P.lambdas, std::vector<double>(P.size()), t};
    StressField S{P.lambdas, std::vector<double>(P.size()), w0, s0, t};
    for (std::size_t k = 0; k < P.size(); ++k) {
        u.coeffs[k] = run.traj[k].alpha_at(t);
        S.sym_coeffs[k] = run.traj[k].rho_conv_at(t);
    }
    return {std::move(u), std::move(S)};
}

namespace detail {

template <class Ratio>
EstimateReport field_report(const std::string& name, const FieldStudy& fs, Ratio&& ratio)
{
    const Study& st = fs.study();
    const ModalProblem& P = st.problem();
    auto sweep = [&](const ModalRun& run, std::span<const double> ts, const std::vector<double>& w0) {
        RatioSup sup;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const auto [u, S] = fields_at(P, run, fs.data().s0, ts[i], w0[i]);
            const auto [lhs, rhs] = ratio(ts[i], u, S);
            sup.add(lhs, rhs, ts[i], 0);
        }
        return sup;
    };
    return finish(name, sweep(st.base(), st.lattice(), fs.w0(0)), sweep(st.refined(), st.refined_lattice(), fs.w0(1)),
                  sweep(st.refined(), st.dense_lattice(), fs.w0(2)), st.probe());
}

} // namespace detail

/// Field-level bounds on ||u(t)||_{H_theta} and ||S(t)||_{D_gamma}.
inline EstimateReport check_soc(const FieldStudy& fs, const EstimateCase& c)
{
    detail::require_family(c, Family::Soc, "check_soc");
    const KernelParams& p = fs.study().problem().params;
    const double d = p.delta(), w = p.omega(), g = c.gamma, th = c.theta;
    const VelocityField u0{fs.study().problem().lambdas, fs.data().u0, 0.0};
    const double nu0 = norm_H(u0, th);
    const double nS0 = norm_D(coordinates_of(u0.lambdas, fs.data().s0), g);
    const double e1 = (1.0 - d) * detail::positive_part((th - g - w) / (1.0 - w));
    const double e2 = d * (th - g - w) / (2.0 * w);
    return detail::field_report(c.name, fs, [&](double t, const VelocityField& u, const StressField& S) -> std::pair<double, double> {
        if (c.variant == "i") return {norm_H(u, th), nu0 + nS0 / std::pow(t, e1)};
        return {norm_D(S, g), std::pow(t, e2) * nu0 + nS0};
    });
}

/// Uniform bound on ||u||_{H_{gamma+omega}} + ||S||_{D_gamma}.
inline EstimateReport check_ut22(const FieldStudy& fs, const EstimateCase& c)
{
    detail::require_family(c, Family::Ut22, "check_ut22");
    const double w = fs.study().problem().params.omega(), g = c.gamma;
    const VelocityField u0{fs.study().problem().lambdas, fs.data().u0, 0.0};
    const double rhs = norm_H(u0, g + w) + norm_D(coordinates_of(u0.lambdas, fs.data().s0), g);
    return detail::field_report(c.name, fs, [&](double, const VelocityField& u, const StressField& S) -> std::pair<double, double> {
        return {norm_H(u, g + w) + norm_D(S, g), rhs};
    });
}

// ---------------------------------------------------------------------------
// Contour-integral cases

/// |int T_mu(iy) e^{iyt} dy| and |int (T_mu w)(iy) e^{iyt} dy| on a (t, mu)
/// lattice. Both integrals are independent of the abscissa x >= 0 of the
/// contour, so they are evaluated on x = 0.
class ContourTable {
public:
    ContourTable(const KernelParams& p, std::vector<double> mus, const ProbeSettings& probe = {},
                 const BromwichOptions& opt = {})
        : params_(p), mus_(std::move(mus)), probe_(probe)
    {
        if (mus_.empty()) throw DomainError("ContourTable: empty mu list");
        fine_times_ = log_lattice(probe.t_min, probe.t_max, 2 * probe.points - 1);
        const std::size_t n = fine_times_.size();
        T_.assign(mus_.size(), std::vector<double>(n));
        Tw_.assign(mus_.size(), std::vector<double>(n));
        parallel_for(mus_.size() * n, [&](std::size_t job) {
            const std::size_t m = job / n, i = job % n;
            const double t = fine_times_[i];
            T_[m][i] = 2.0 * std::numbers::pi * std::abs(invert_Tmu(t, mus_[m], p, opt).value);
            Tw_[m][i] = 2.0 * std::numbers::pi * std::abs(invert_Tmu_w(t, mus_[m], p, opt).value);
        });
    }

    [[nodiscard]] const KernelParams& params() const noexcept { return params_; }
    [[nodiscard]] const ProbeSettings& probe() const noexcept { return probe_; }
    [[nodiscard]] std::span<const double> mus() const noexcept { return mus_; }
    [[nodiscard]] std::span<const double> times() const noexcept { return fine_times_; }
    [[nodiscard]] double T(std::size_t m, std::size_t i) const { return T_[m][i]; }
    [[nodiscard]] double Tw(std::size_t m, std::size_t i) const { return Tw_[m][i]; }

private:
    KernelParams params_;
    std::vector<double> mus_;
    ProbeSettings probe_;
    std::vector<double> fine_times_;
    std::vector<std::vector<double>> T_, Tw_;
};

/// Interpolated contour bounds in (chi) and (tau).
inline EstimateReport check_ie1(const ContourTable& tab, const EstimateCase& c)
{
    detail::require_family(c, Family::Ie1, "check_ie1");
    const double d = tab.params().delta(), w = tab.params().omega();
    auto sweep = [&](std::size_t stride) {
        RatioSup sup;
        for (std::size_t m = 0; m < tab.mus().size(); ++m) {
            const double mu = tab.mus()[m];
            for (std::size_t i = 0; i < tab.times().size(); i += stride) {
                const double t = tab.times()[i];
                if (c.variant == "a")
                    sup.add(tab.T(m, i) * std::pow(mu, c.chi / (2.0 - d)) * std::pow(t, c.chi), 1.0, t, m);
                else
                    sup.add(std::sqrt(mu) * tab.Tw(m, i) * std::pow(mu, (w * (1.0 - c.tau) + c.tau) / 2.0) *
                                std::pow(t, c.tau * (1.0 - d)),
                            1.0, t, m);
            }
        }
        return sup;
    };
    // Tabulated values do not depend on a time grid, so refinement here is the
    // doubled probe density.
    const RatioSup base = sweep(2);
    const RatioSup dense = sweep(1);
    return detail::finish(c.name, base, dense, dense, tab.probe());
}

// ---------------------------------------------------------------------------
// Slope cases

/// int_R |(T_mu w)(iy)| dy by direct quadrature.
inline double integral_abs_Tmu_w(double mu, const KernelParams& p, double tol = 1e-11)
{
    QuadratureSpec q = QuadratureSpec{}.with_tol(tol).with_endpoint(1.0 - p.delta());
    q.max_subdivisions = 20000;
    const double scale = detail::modal_scale(mu, p);
    auto f = [&](double y) { return std::abs(eval_Tmu_w(cplx(0.0, y), mu, p)); };
    // |f(-iy)| = |f(iy)| by conjugate symmetry.
    return 2.0 * quad::integrate_half_line(f, q, scale).value;
}

/// Fitted mu-exponent of int |T_mu w(iy)| dy against -1/(2 - delta), plus
/// monotonicity in mu and positivity of sin(pi beta/2) - sin(pi alpha/2).
inline EstimateReport check_sol5(const KernelParams& p, std::span<const double> mus, const ProbeSettings& probe = {})
{
    if (mus.size() < 2) throw DomainError("check_sol5: need at least two mu values");
    std::vector<double> I;
    for (double mu : mus) I.push_back(integral_abs_Tmu_w(mu, p));
    EstimateReport r;
    r.name = "sol5";
    r.slope_fit = fit_loglog(mus, I, -1.0 / (2.0 - p.delta()));
    r.sample_x.assign(mus.begin(), mus.end());
    r.sample_y = I;
    double M = 0.0;
    bool monotone = true;
    for (std::size_t i = 0; i < I.size(); ++i) {
        const double v = I[i] * std::pow(mus[i], 1.0 / (2.0 - p.delta()));
        if (v > M) {
            M = v;
            r.arg_sup_k = i;
        }
        if (i > 0 && (mus[i] > mus[i - 1]) != (I[i] < I[i - 1])) monotone = false;
    }
    r.empirical_M = M;
    const double K = std::sin(std::numbers::pi * p.beta() / 2.0) - std::sin(std::numbers::pi * p.alpha() / 2.0);
    r.passed = slope_ok(*r.slope_fit, probe) && monotone && K > 0.0;
    r.note = "K=" + detail::fmt_param(K) + (monotone ? "" : "; integral not monotone in mu");
    return r;
}

/// Fitted log-log slope of ||u(t)||_V^2 on [t_lo, t_hi] against -inf(delta, 2 - 2 delta);
/// the report also requires the L2-type stress norm to decrease over the window.
inline EstimateReport check_decay_u(const ModalProblem& problem, std::span<const ModalTrajectory> traj,
                                    const StressDecomposition& s0, double t_lo, double t_hi, std::size_t points = 21,
                                    const ProbeSettings& probe = {})
{
    detail::require_trajectories(problem, traj);
    const double d = problem.params.delta();
    const std::vector<double> ts = log_lattice(t_lo, t_hi, points);
    std::vector<double> v(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < problem.size(); ++k) {
            const double a = traj[k].alpha_at(ts[i]);
            s += problem.lambdas[k] * a * a;
        }
        v[i] = s;
    }
    EstimateReport r;
    r.name = "decay_u";
    r.slope_fit = fit_loglog(ts, v, -std::min(d, 2.0 - 2.0 * d));
    r.sample_x = ts;
    r.sample_y = v;
    r.empirical_M = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double m = v[i] * std::pow(ts[i], std::min(d, 2.0 - 2.0 * d));
        if (m > r.empirical_M) {
            r.empirical_M = m;
            r.arg_sup_t = ts[i];
        }
    }
    bool stress_decays = true;
    if (s0.a.size() == problem.size()) {
        auto stress = [&](double t) {
            StressField S{problem.lambdas, std::vector<double>(problem.size()), eval_W0(t, problem.params), s0, t};
            for (std::size_t k = 0; k < problem.size(); ++k) S.sym_coeffs[k] = traj[k].rho_conv_at(t);
            return norm_D(S, 0.0);
        };
        stress_decays = stress(t_hi) < stress(t_lo);
    }
    r.passed = slope_ok(*r.slope_fit, probe) && stress_decays;
    r.note = "fitted " + detail::fmt_param(r.slope_fit->fitted) + " vs predicted " + detail::fmt_param(r.slope_fit->predicted) +
             (stress_decays ? "" : "; stress norm did not decrease");
    return r;
}

} // namespace fmx
