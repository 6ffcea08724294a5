// Acceptance gate: one line per criterion, PASS or FAIL, with the measured
// quantity, its limit and the wall time. Exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fmx/fmx.hpp"

using namespace fmx;

namespace {

struct Outcome {
    bool ok;
    std::string detail;
};

struct Criterion {
    int id;
    const char* title;
    double budget_s;
    std::function<Outcome()> run;
};

std::string fmt(const char* f, double a) { char b[96]; std::snprintf(b, sizeof b, f, a); return b; }
std::string fmt(const char* f, double a, double b2) { char b[128]; std::snprintf(b, sizeof b, f, a, b2); return b; }

double rel(double x, double ref) { return std::abs(x - ref) / std::abs(ref); }

// 1. W0 at alpha = 1/2 against e^t erfc(sqrt t).
Outcome kernel_golden()
{
    const KernelParams p(0.5, 0.7);
    double worst = 0.0;
    for (double t : log_lattice(1e-2, 10.0, 20)) worst = std::max(worst, rel(eval_W0(t, p), std::exp(t) * std::erfc(std::sqrt(t))));
    const bool exact0 = eval_W0(0.0, p) == 1.0;
    return {worst <= 1e-8 && exact0, fmt("max rel err %.2e (limit 1e-8), ", worst) + (exact0 ? "W0(0)=1 exactly" : "W0(0)!=1")};
}

// 2. -W0' = E_alpha by Richardson-extrapolated central differences, and int_0^T E_alpha = 1 - W0(T).
Outcome kernel_derivative()
{
    double fd = 0.0, integ = 0.0;
    for (const KernelParams p : {KernelParams(0.3, 0.7), KernelParams(0.5, 0.7), KernelParams(0.8, 0.9)}) {
        const QuadratureSpec q = QuadratureSpec{}.with_tol(1e-13);
        for (double t : log_lattice(0.1, 100.0, 13)) {
            auto d = [&](double h) { return (eval_W0(t + h, p, q) - eval_W0(t - h, p, q)) / (2.0 * h); };
            const double h = 1e-3 * t;
            const double D = (4.0 * d(h / 2) - d(h)) / 3.0;
            fd = std::max(fd, rel(-D, eval_Ealpha(t, p, q)));
        }
        for (double T : {1.0, 10.0, 100.0}) {
            const auto r = quad::integrate_left_singular([&](double t) { return eval_Ealpha(t, p); }, T, p.alpha(),
                                                         QuadratureSpec{}.with_tol(1e-11));
            integ = std::max(integ, std::abs(r.value - (1.0 - eval_W0(T, p))));
        }
    }
    return {fd <= 1e-6 && integ <= 1e-7, fmt("FD rel err %.2e (limit 1e-6), ", fd) + fmt("integral err %.2e (limit 1e-7)", integ)};
}

// 3. Caputo of t, RL of 1, Caputo of constants.
Outcome fracops_golden()
{
    const TimeGrid g(1.0, 2048, 3.0);
    double ec = 0.0, er = 0.0, ez = 0.0;
    for (auto [a, b] : {std::pair{0.4, 0.6}, std::pair{0.3, 0.7}, std::pair{0.7, 0.9}}) {
        const auto lin = SampledFunction<double>::sample(g, [](double t) { return t; });
        const auto one = SampledFunction<double>::sample(g, [](double) { return 1.0; });
        const auto five = SampledFunction<double>::sample(g, [](double) { return -5.0; });
        const auto c = caputo_derivative(lin, a);
        const auto r = rl_integral(one, b);
        const auto z = caputo_derivative(five, a);
        for (std::size_t n = 1; n < g.size(); ++n) {
            const double t = g[n];
            ec = std::max(ec, rel(c[n], std::pow(t, 1.0 - a) / std::tgamma(2.0 - a)));
            er = std::max(er, rel(r[n], std::pow(t, 1.0 - b) / std::tgamma(2.0 - b)));
            ez = std::max(ez, std::abs(z[n]));
        }
    }
    return {ec <= 1e-6 && er <= 1e-6 && ez <= 1e-12,
            fmt("Caputo(t) %.2e, ", ec) + fmt("RL(1) %.2e (limit 1e-6), ", er) + fmt("Caputo(const) %.2e (limit 1e-12)", ez)};
}

// 4. Laplace transform of the Caputo derivative of a bump.
Outcome laplace_identity()
{
    double worst = 0.0;
    const double a = 0.4;
    const Bump B{0.6, 0.5};
    for (std::complex<double> s : {std::complex<double>(2, 0), std::complex<double>(5, 0), std::complex<double>(2, 1)}) {
        const TimeGrid G(laplace_horizon(s), 32768, 1.0);
        const auto f = SampledFunction<double>::sample(G, B);
        const auto d = caputo_derivative(f, a);
        const auto L1 = laplace_numeric(d, s).value;
        const auto L0 = laplace_numeric(f, s).value;
        worst = std::max(worst, std::abs(L1 - std::pow(s, a) * L0) / std::abs(L0));
    }
    return {worst <= 1e-5, fmt("max |L[D f] - s^a L[f]| / |L[f]| = %.2e (limit 1e-5)", worst)};
}

// 5. Weak residual of the scalar relaxation equation under grid doubling.
Outcome scalar_residual()
{
    double worst_ratio = 1e300;
    const double alpha = 0.4;
    const std::vector<std::function<double(double)>> forcing = {[](double) { return 1.0; }, [](double t) { return t; },
                                                                 [](double t) { return std::sin(t); }};
    // One test-function bank per grid, shared by all forcing terms.
    std::vector<double> prev(forcing.size() * 2, 0.0);
    for (std::size_t N : {256, 512, 1024, 2048}) {
        const TimeGrid G(2.0, N, 3.0);
        const TestFunctionBank bank(G, alpha);
        for (std::size_t i = 0; i < forcing.size(); ++i)
            for (std::size_t ia = 0; ia < 2; ++ia) {
                const double a = static_cast<double>(ia);
                const auto Fs = SampledFunction<double>::sample(G, forcing[i]);
                const double res = bank.residual(solve_scalar_fractional(Fs, a, alpha), a, Fs);
                double& last = prev[2 * i + ia];
                if (N > 256) worst_ratio = std::min(worst_ratio, last / res);
                last = res;
            }
    }
    return {worst_ratio >= 1.8, fmt("smallest residual reduction per doubling %.3f (limit 1.8)", worst_ratio)};
}

// 6. Volterra route against Bromwich inversion.
Outcome two_routes()
{
    double worst = 0.0;
    for (const KernelParams p : {KernelParams(0.3, 0.7), KernelParams(0.45, 0.5)}) {
        const ModalProblem P(p, {1, 1, 10, 10, 100, 100, 1000, 1000}, {1, 0, 1, 0, 1, 0, 1, 0}, {0, 1, 0, 1, 0, 1, 0, 1});
        const VolterraSolver S(p, TimeGrid(10.0, 4000, 3.0));
        const auto tr = S.solve_all(P);
        for (std::size_t k = 0; k < P.size(); ++k)
            for (double t : {0.1, 1.0, 10.0}) {
                const double L = alpha_k_laplace(t, P.lambdas[k], P.alpha0[k], P.b[k], p);
                worst = std::max(worst, std::abs(tr[k].alpha_at(t) - L) / std::abs(L));
            }
    }
    return {worst <= 1e-4, fmt("max rel disagreement %.2e (limit 1e-4)", worst)};
}

// 7. Decay slope of ||u||_V^2 over [1, 100] for a long random spectrum.
Outcome decay_slope()
{
    bool ok = true;
    std::string d;
    for (const KernelParams p : {KernelParams(0.4, 0.7), KernelParams(0.1, 0.9)}) {
        const std::size_t K = 10000;
        const SpectralBasis B = synthetic_basis(K);
        std::mt19937_64 rng(20241014);
        std::normal_distribution<double> normal;
        std::vector<double> u0(K);
        StressDecomposition s0{std::vector<double>(K), std::vector<double>(K), 0.0};
        for (std::size_t k = 0; k < K; ++k) {
            const double s = 1.0 / static_cast<double>(k + 1);
            u0[k] = s * normal(rng);
            s0.a[k] = s * normal(rng);
            s0.a_t[k] = s * normal(rng);
        }
        const ModalProblem P = project_initial_data(p, B.lambdas, u0, s0);
        VolterraOptions opt;
        opt.richardson = false;
        const auto tr = VolterraSolver(p, TimeGrid(100.0, 1000, 3.0), opt).solve_all(P);
        const EstimateReport r = check_decay_u(P, tr, s0, 1.0, 100.0);
        ok = ok && r.passed;
        d += fmt("delta=%.2g: fitted %.4f ", p.delta(), r.slope_fit->fitted) +
             fmt("vs %.4f (r2 %.4f); ", r.slope_fit->predicted, r.slope_fit->r2);
    }
    return {ok, d + "band +-10%"};
}

// 8. mu-slope of int |T_mu w(iy)| dy.
Outcome mu_slope()
{
    bool ok = true;
    std::string d;
    const std::vector<double> mus{1, 10, 100, 1e3, 1e4};
    for (const KernelParams p : {KernelParams(0.3, 0.7), KernelParams(0.1, 0.9)}) {
        const EstimateReport r = check_sol5(p, mus);
        ok = ok && r.passed;
        d += fmt("delta=%.2g: fitted %.4f ", p.delta(), r.slope_fit->fitted) +
             fmt("vs %.4f (r2 %.5f); ", r.slope_fit->predicted, r.slope_fit->r2);
    }
    return {ok, d + "band +-10%"};
}

// 9. Every in-range lattice case of the suite.
Outcome estimate_suite()
{
    Scenario s;
    s.name = "acceptance";
    s.params = KernelParams(0.3, 0.7);
    s.basis.size = 256;
    s.horizon = 1000.0;
    s.probe.t_max = 1000.0;
    s.grid = StudyGrid{2000, 3.0};
    s.contour_mus = {1.0, 10.0, 100.0};
    std::vector<std::string> names;
    for (const EstimateCase& c : default_cases(s.params)) names.push_back(c.name);
    const auto reports = run_estimates(s, names);
    int failed = 0;
    double drift = 0.0, M = 0.0;
    std::string first;
    for (const auto& r : reports) {
        drift = std::max(drift, r.refinement_drift);
        if (std::isfinite(r.empirical_M)) M = std::max(M, r.empirical_M);
        if (!r.passed) {
            ++failed;
            if (first.empty()) first = r.name;
        }
    }
    std::string d = std::to_string(reports.size() - failed) + "/" + std::to_string(reports.size()) + " cases pass, " +
                    fmt("max drift %.2e (limit 0.05), ", drift) + fmt("max M %.4g", M);
    if (failed) d += ", first failure " + first;
    return {failed == 0, d};
}

// 10. ||u(t) - u0||_{H_{gamma+omega}} + ||S(t) - S0||_{D_gamma} at t = 2^-j.
Outcome continuity()
{
    const KernelParams p(0.3, 0.7);
    const SpectralBasis B = synthetic_basis(64);
    const InitialData d = initial_data_preset("smooth", B.lambdas);
    const ModalProblem P = project_initial_data(p, B.lambdas, d.u0, d.s0);
    const ModalRun run = solve_modal_run(P, TimeGrid(1.0, 2000, 3.0));
    const VelocityField u0{B.lambdas, d.u0, 0.0};
    const StressCoordinates c0 = coordinates_of(B.lambdas, d.s0);
    bool ok = true;
    std::string out;
    for (double g : {0.0, 0.5}) {
        std::vector<double> e;
        for (int j = 0; j <= 10; ++j) {
            const double t = std::ldexp(1.0, -j);
            const auto [u, S] = fields_at(P, run, d.s0, t, eval_W0(t, p));
            e.push_back(norm_H(u - u0, g + p.omega()) + norm_D(S.coordinates() - c0, g));
        }
        bool mono = true;
        for (std::size_t j = 1; j < e.size(); ++j) mono = mono && e[j] < e[j - 1];
        const double ratio = e.back() / e.front();
        ok = ok && mono && ratio <= 1e-3;
        out += fmt("gamma=%.1f: ", g) + fmt("e(2^-10)/e(1) = %.3e, ", ratio) + (mono ? "monotone; " : "not monotone; ");
    }
    return {ok, out + "limit 1e-3"};
}

// 11. Orthogonality and norms of the box families in D_theta and Delta_theta.
Outcome basis_identities()
{
    const SpectralBasis B = build_periodic_basis(2);
    const std::size_t K = B.size();
    std::vector<LatticeTensorField> eps, epsT, sym;
    for (std::size_t k = 0; k < K; ++k) {
        eps.push_back(sample_epsilon(B, k));
        epsT.push_back(eps.back().transposed());
        LatticeTensorField s = eps.back();
        s.axpy(1.0, epsT.back());
        sym.push_back(std::move(s));
    }
    // Coefficients along eps_j, then D_theta(f, g) = <f, g> + sum (lambda_j^theta - 1) c_f c_g.
    auto coeffs = [&](const LatticeTensorField& f) {
        std::vector<double> c(K);
        for (std::size_t j = 0; j < K; ++j) c[j] = lattice_inner(f, eps[j]);
        return c;
    };
    std::vector<std::vector<double>> ce, cT, cs;
    for (std::size_t k = 0; k < K; ++k) {
        ce.push_back(coeffs(eps[k]));
        cT.push_back(coeffs(epsT[k]));
        cs.push_back(coeffs(sym[k]));
    }
    double worst = 0.0;
    for (double th : {0.0, 0.5, 1.0, 2.0}) {
        auto D = [&](const LatticeTensorField& f, const std::vector<double>& cf, const LatticeTensorField& gg,
                     const std::vector<double>& cg) {
            double s = lattice_inner(f, gg);
            for (std::size_t j = 0; j < K; ++j) s += (std::pow(B.lambdas[j], th) - 1.0) * cf[j] * cg[j];
            return s;
        };
        for (std::size_t i = 0; i < K; ++i)
            for (std::size_t j = i; j < K; ++j) {
                const double l = B.lambdas[i];
                const double e_ref = i == j ? std::pow(l, th) : 0.0;
                const double t_ref = i == j ? 1.0 : 0.0;
                const double s_ref = i == j ? 1.0 + std::pow(l, th) : 0.0;
                worst = std::max(worst, std::abs(D(eps[i], ce[i], eps[j], ce[j]) - e_ref) / std::max(1.0, e_ref));
                worst = std::max(worst, std::abs(D(epsT[i], cT[i], epsT[j], cT[j]) - t_ref));
                worst = std::max(worst, std::abs(D(sym[i], cs[i], sym[j], cs[j]) - s_ref) / std::max(1.0, s_ref));
            }
        for (std::size_t k = 0; k < K; ++k) {
            const double l = B.lambdas[k];
            // Velocity modes in H_theta and the Delta_theta coefficient norm.
            const VelocityField wk{B.lambdas, [&] { std::vector<double> c(K, 0.0); c[k] = 1.0; return c; }(), 0.0};
            worst = std::max(worst, rel(norm_H(wk, th), std::pow(l, th / 2.0)));
            const StressCoordinates ck = coordinates_of(B.lambdas, decompose_stress(B, eps[k]));
            worst = std::max(worst, rel(norm_D(ck, th), std::pow(l, th / 2.0)));
            worst = std::max(worst, rel(norm_Delta(ck, th), std::pow(l, th / 2.0)));
            const StressCoordinates cks = coordinates_of(B.lambdas, decompose_stress(B, sym[k]));
            worst = std::max(worst, rel(norm_D(cks, th), std::sqrt(1.0 + std::pow(l, th))));
        }
        // The lattice product itself, on a few pairs.
        for (std::size_t k : {std::size_t{0}, K / 2, K - 1})
            worst = std::max(worst, std::abs(lattice_D_inner(B, sym[k], sym[k], th) - (1.0 + std::pow(B.lambdas[k], th))) /
                                        (1.0 + std::pow(B.lambdas[k], th)));
    }
    double div = 0.0;
    for (std::size_t k = 0; k < K; ++k) div = std::max(div, lattice_divergence(B, k));
    return {worst <= 1e-8 && div <= 1e-10,
            std::to_string(K) + " modes, " + fmt("max identity err %.2e (limit 1e-8), ", worst) + fmt("max divergence %.2e", div)};
}

} // namespace

int main()
{
    const std::vector<Criterion> criteria = {
        {1, "kernel golden values", 1.0, kernel_golden},
        {2, "kernel derivative identity", 5.0, kernel_derivative},
        {3, "fractional operator golden values", 2.0, fracops_golden},
        {4, "Laplace identity for the Caputo derivative", 2.0, laplace_identity},
        {5, "scalar relaxation weak residual", 10.0, scalar_residual},
        {6, "two-route modal agreement", 60.0, two_routes},
        {7, "velocity decay slope", 120.0, decay_slope},
        {8, "mu-slope of the contour integral", 30.0, mu_slope},
        {9, "estimate suite", 300.0, estimate_suite},
        {10, "continuity at t=0", 60.0, continuity},
        {11, "periodic box basis identities", 30.0, basis_identities},
    };
    int failures = 0;
    for (const Criterion& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o{false, ""};
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = dt <= c.budget_s;
        const bool ok = o.ok && in_time;
        failures += !ok;
        std::printf("[%s] %2d %-44s %s; %.2f s (budget %.0f s%s)\n", ok ? "PASS" : "FAIL", c.id, c.title, o.detail.c_str(), dt,
                    c.budget_s, in_time ? "" : ", exceeded");
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures;
}
