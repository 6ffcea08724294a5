#include <cmath>

#include <gtest/gtest.h>

#include "fmx/kernels.hpp"
#include "fmx/soe.hpp"
#include "oracles.hpp"

using namespace fmx;

TEST(Oracle, LanczosMatchesTgamma)
{
    for (double x = 0.05; x < 20.0; x += 0.37) EXPECT_NEAR(oracle::gamma(x) / std::tgamma(x), 1.0, 1e-13) << x;
}

TEST(Kernels, W0HalfOrderIsScaledErfc)
{
    const KernelParams p(0.5, 0.8);
    for (double t : {1e-3, 1e-2, 0.1, 1.0, 5.0, 10.0, 30.0})
        EXPECT_NEAR(eval_W0(t, p) / (std::exp(t) * std::erfc(std::sqrt(t))), 1.0, 1e-9) << t;
}

TEST(Kernels, W0AtZeroIsOne)
{
    EXPECT_EQ(eval_W0(0.0, KernelParams(0.3, 0.7)), 1.0);
}

class KernelSeries : public ::testing::TestWithParam<std::pair<double, double>> {};

TEST_P(KernelSeries, MatchesMittagLefflerSeries)
{
    const auto [a, b] = GetParam();
    const KernelParams p(a, b);
    for (double t : {1e-4, 1e-2, 0.1, 0.5, 1.0}) {
        EXPECT_NEAR(eval_W0(t, p) / oracle::W0(t, a), 1.0, 1e-9) << "W0 t=" << t;
        EXPECT_NEAR(eval_Ealpha(t, p) / oracle::Ealpha(t, a), 1.0, 1e-9) << "E t=" << t;
        EXPECT_NEAR(eval_rho(t, p) / oracle::rho(t, a, b), 1.0, 1e-8) << "rho t=" << t;
    }
}

INSTANTIATE_TEST_SUITE_P(Orders, KernelSeries,
                         ::testing::Values(std::pair{0.3, 0.7}, std::pair{0.45, 0.5}, std::pair{0.1, 0.9}, std::pair{0.7, 0.8}));

TEST(Kernels, SpectralRouteAgreesWithDirectRho)
{
    const KernelParams p(0.3, 0.7);
    const QuadratureSpec q = QuadratureSpec{}.with_tol(1e-13);
    for (double t : {0.01, 0.1, 1.0, 10.0, 100.0}) EXPECT_NEAR(eval_spectral(Kernel::Rho, t, p, q) / eval_rho(t, p), 1.0, 1e-8);
}

TEST(Kernels, RhoTendsToW0AsOrdersMerge)
{
    // As alpha -> beta the rho symbol tends to the W0 symbol and t^delta -> 1.
    const double beta = 0.5;
    for (double t : {0.1, 1.0, 10.0}) {
        double prev = 1.0;
        for (double eps : {1e-2, 1e-3, 1e-4}) {
            const KernelParams p(beta - eps, beta);
            const KernelParams h(0.5, 0.7);
            const double gap = std::abs(eval_rho(t, p) * std::pow(t, p.delta()) - eval_W0(t, h));
            EXPECT_LT(gap, 0.2 * prev) << t << " " << eps;
            prev = gap;
        }
        EXPECT_LT(prev, 1e-3) << t;
    }
}

TEST(Kernels, EalphaIsMinusDerivativeOfW0)
{
    const KernelParams p(0.3, 0.7);
    for (double t : {0.2, 2.0, 20.0}) {
        const double h = 1e-4 * t;
        const double d = (eval_W0(t + h, p) - eval_W0(t - h, p)) / (2 * h);
        EXPECT_NEAR(-d / eval_Ealpha(t, p), 1.0, 1e-6);
    }
}

TEST(Kernels, PanelIntegralOfEalphaTelescopes)
{
    const KernelParams p(0.6, 0.9);
    for (auto [a, b] : {std::pair{0.0, 1.0}, std::pair{0.5, 3.0}, std::pair{10.0, 200.0}})
        EXPECT_NEAR(kernel_panel_integral(Kernel::Ealpha, a, b, p), eval_W0(a, p) - eval_W0(b, p), 1e-10);
}

TEST(Kernels, CompletelyMonotoneShape)
{
    const KernelParams p(0.2, 0.6);
    double w = 1.0, e = 1e300, r = 1e300;
    for (double t = 1e-3; t < 1e3; t *= 3.0) {
        const double wn = eval_W0(t, p), en = eval_Ealpha(t, p), rn = eval_rho(t, p);
        EXPECT_GT(wn, 0.0);
        EXPECT_LT(wn, w);
        EXPECT_LT(en, e);
        EXPECT_LT(rn, r);
        w = wn;
        e = en;
        r = rn;
    }
}

TEST(Kernels, RhoBehavesLikePowerAtZero)
{
    const KernelParams p(0.3, 0.7);
    const double t = 1e-12;
    EXPECT_NEAR(eval_rho(t, p) * std::pow(t, p.delta()) * oracle::gamma(1.0 - p.delta()), 1.0, 1e-3);
}

TEST(Kernels, MuKernelsArePowerLaws)
{
    const KernelParams p(0.25, 0.75);
    const auto [m1, m2] = eval_mu_kernels(2.0, p);
    EXPECT_NEAR(m1, std::pow(2.0, -0.25) / oracle::gamma(0.75), 1e-13);
    EXPECT_NEAR(m2, std::pow(2.0, -0.75) / oracle::gamma(0.25), 1e-13);
    const QuadratureSpec q = QuadratureSpec{}.with_tol(1e-13);
    EXPECT_NEAR(eval_spectral(Kernel::Mu1, 2.0, p, q) / m1, 1.0, 1e-9);
    EXPECT_NEAR(eval_spectral(Kernel::Mu2, 2.0, p, q) / m2, 1.0, 1e-9);
}

TEST(Kernels, RejectsBadTimes)
{
    const KernelParams p(0.3, 0.7);
    EXPECT_THROW(eval_W0(-1.0, p), DomainError);
    EXPECT_THROW(eval_Ealpha(0.0, p), DomainError);
    EXPECT_THROW(eval_rho(std::nan(""), p), DomainError);
}

TEST(Params, RejectsOrdersOutOfRange)
{
    EXPECT_THROW(KernelParams(0.5, 0.5), ValidationError);
    EXPECT_THROW(KernelParams(0.0, 0.5), ValidationError);
    EXPECT_THROW(KernelParams(0.5, 1.0), ValidationError);
    const KernelParams p(0.3, 0.7);
    EXPECT_DOUBLE_EQ(p.delta(), 0.4);
    EXPECT_DOUBLE_EQ(p.omega(), 0.25);
}

TEST(ExpSum, ReproducesKernelsOnTheGridRange)
{
    const KernelParams p(0.3, 0.7);
    for (Kernel k : {Kernel::W0, Kernel::Ealpha, Kernel::Rho}) {
        const ExpSum K = build_exp_sum(k, p, 10.0, 1e-6);
        for (double t : {1e-5, 1e-3, 0.1, 1.0, 10.0}) {
            const double ref = eval_spectral(k, t, p, QuadratureSpec{}.with_tol(1e-13));
            EXPECT_NEAR(K(t) / ref, 1.0, 1e-7) << static_cast<int>(k) << " t=" << t;
        }
    }
}

TEST(ExpSum, StepFactorsSeriesAndClosedFormAgree)
{
    for (double z : {0.49, 0.5, 0.51}) {
        const StepFactors<double> c(z);
        const double e = std::exp(-z);
        EXPECT_NEAR(c.phi1, (1 - e) / z, 1e-14);
        EXPECT_NEAR(c.phi2, ((1 - e) / z - e) / z, 1e-14);
    }
}

TEST(ExpSum, ConvolutionOfOneIsKernelIntegral)
{
    const KernelParams p(0.4, 0.8);
    const TimeGrid g(5.0, 200, 2.0);
    const ExpSum E = build_exp_sum(Kernel::Ealpha, p, g.horizon(), g.min_step());
    const std::vector<double> one(g.size(), 1.0);
    const auto c = convolve(E, g, one);
    for (std::size_t n : {std::size_t{10}, std::size_t{100}, std::size_t{200}}) EXPECT_NEAR(c[n], 1.0 - eval_W0(g[n], p), 1e-7);
}
