#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "fmx/estimates.hpp"
#include "fmx/suite.hpp"

using namespace fmx;

TEST(LogLattice, EndpointsAndRatio)
{
    const auto t = log_lattice(1e-3, 1e3, 31);
    ASSERT_EQ(t.size(), 31u);
    EXPECT_EQ(t.front(), 1e-3);
    EXPECT_EQ(t.back(), 1e3);
    for (std::size_t i = 1; i < t.size(); ++i) EXPECT_NEAR(t[i] / t[i - 1], std::pow(10.0, 0.2), 1e-12);
    EXPECT_THROW(log_lattice(0.0, 1.0, 5), DomainError);
    EXPECT_THROW(log_lattice(1.0, 2.0, 1), DomainError);
}

TEST(SlopeFit, RecoversExactPowerLaw)
{
    const auto x = log_lattice(1.0, 1e4, 9);
    std::vector<double> y;
    for (double v : x) y.push_back(3.0 * std::pow(v, -0.625));
    const SlopeFit f = fit_loglog(x, y, -0.625);
    EXPECT_NEAR(f.fitted, -0.625, 1e-12);
    EXPECT_NEAR(f.r2, 1.0, 1e-12);
    ProbeSettings s;
    EXPECT_TRUE(slope_ok(f, s));
    EXPECT_FALSE(slope_ok(fit_loglog(x, y, -0.5), s));
}

TEST(RatioSup, ZeroOverZeroIsSkipped)
{
    RatioSup r;
    r.add(0.0, 0.0, 1.0, 0);
    EXPECT_EQ(r.M, 0.0);
    EXPECT_TRUE(std::isnan(r.t));
    r.add(2.0, 4.0, 2.0, 3);
    r.add(1.0, 4.0, 3.0, 4);
    EXPECT_EQ(r.M, 0.5);
    EXPECT_EQ(r.t, 2.0);
    EXPECT_EQ(r.k, 3u);
    r.add(1.0, 0.0, 5.0, 1);
    EXPECT_TRUE(std::isinf(r.M));
}

TEST(RelativeChange, Conventions)
{
    EXPECT_EQ(relative_change(0.0, 0.0), 0.0);
    EXPECT_NEAR(relative_change(2.0, 2.1), 0.05, 1e-15);
    EXPECT_TRUE(std::isinf(relative_change(0.0, 1.0)));
}

TEST(EstimateCase, DefaultsValidateAndRangesAreEnforced)
{
    for (const auto& pr : {std::pair{0.3, 0.7}, std::pair{0.1, 0.9}, std::pair{0.45, 0.5}}) {
        const KernelParams p(pr.first, pr.second);
        const auto cases = default_cases(p);
        EXPECT_GT(cases.size(), 20u);
        for (const auto& c : cases) EXPECT_NO_THROW(c.validate()) << c.name;
    }
    EXPECT_THROW((EstimateCase{"x", Family::Sxl3, "i", 1.0, 0.5}).validate(), ValidationError);
    EXPECT_THROW((EstimateCase{"x", Family::Sxl3, "i", 0.0, 1.5}).validate(), ValidationError);
    EXPECT_THROW((EstimateCase{"x", Family::Sot1, "iii", 0.0, 0.0, 1.5, 0.5}).validate(), ValidationError);
    EXPECT_THROW((EstimateCase{"x", Family::Ie1, "a", 0.0, 0.0, 0.0, 0.0, 2.0}).validate(), ValidationError);
    EXPECT_THROW((EstimateCase{"x", Family::Smoothness, "other"}).validate(), ValidationError);
}

TEST(EstimateCase, FamilyMismatchIsRejected)
{
    const KernelParams p(0.3, 0.7);
    ProbeSettings probe;
    probe.t_max = 5.0;
    probe.points = 6;
    const Study st(probe_problem(p, std::vector<double>{1.0}), probe, StudyGrid{100, 2.0});
    const EstimateCase soc{"soc[g=0,th=0]", Family::Soc, "i"};
    EXPECT_THROW(check_sot1(st, soc), DomainError);
}

namespace {

ModalProblem scaled(const ModalProblem& P, double c)
{
    std::vector<double> a0 = P.alpha0, b = P.b;
    for (double& v : a0) v *= c;
    for (double& v : b) v *= c;
    return ModalProblem(P.params, P.lambdas, a0, b);
}

} // namespace

TEST(Study, ConstantsAreInvariantUnderDataScaling)
{
    const KernelParams p(0.3, 0.7);
    ProbeSettings probe;
    probe.t_min = 1e-2;
    probe.t_max = 10.0;
    probe.points = 11;
    const StudyGrid grid{200, 3.0};
    const ModalProblem P = probe_problem(p, std::vector<double>{1.0, 50.0});
    const Study a(P, probe, grid);
    const Study b(scaled(P, 1e3), probe, grid);
    for (const EstimateCase& c : default_cases(p)) {
        EstimateReport ra, rb;
        if (c.family == Family::Sot1) {
            ra = check_sot1(a, c);
            rb = check_sot1(b, c);
        } else if (c.family == Family::Sxl3) {
            ra = check_sxl3(a, c);
            rb = check_sxl3(b, c);
        } else {
            continue;
        }
        ASSERT_TRUE(std::isfinite(ra.empirical_M)) << c.name;
        EXPECT_NEAR(rb.empirical_M, ra.empirical_M, 1e-10 * (1.0 + ra.empirical_M)) << c.name;
        EXPECT_EQ(ra.arg_sup_k, rb.arg_sup_k) << c.name;
    }
}

TEST(Study, RefinedLatticeExtendsTheBaseLattice)
{
    const KernelParams p(0.45, 0.5);
    ProbeSettings probe;
    probe.t_min = 0.1;
    probe.t_max = 10.0;
    probe.points = 5;
    const Study st(probe_problem(p, std::vector<double>{2.0}), probe, StudyGrid{100, 2.0});
    const auto base = st.lattice();
    const auto ref = st.refined_lattice();
    ASSERT_GT(ref.size(), base.size());
    for (std::size_t i = 0; i < base.size(); ++i) EXPECT_EQ(ref[i], base[i]);
    EXPECT_EQ(ref.back(), 20.0);
    EXPECT_EQ(st.dense_lattice().size(), 9u);
    EXPECT_EQ(st.refined().grid.horizon(), 20.0);
}

TEST(Selection, PrefixesAndExactNames)
{
    const KernelParams p(0.3, 0.7);
    const std::vector<std::string> all = case_names(p);
    EXPECT_EQ(select_cases(p, std::vector<std::string>{"all"}).size(), all.size());
    const auto sot1 = select_cases(p, std::vector<std::string>{"sot1"});
    ASSERT_FALSE(sot1.empty());
    for (const auto& n : sot1) EXPECT_EQ(n.rfind("sot1", 0), 0u) << n;
    EXPECT_EQ(select_cases(p, std::vector<std::string>{"sot1.i"}), std::vector<std::string>{"sot1.i"});
    EXPECT_EQ(select_cases(p, std::vector<std::string>{"sol5", "sol5"}).size(), 1u);
    EXPECT_FALSE(selector_matches("sot", "sot1.i"));
    EXPECT_THROW(select_cases(p, std::vector<std::string>{"nope"}), ValidationError);
}

TEST(InitialData, PresetsAndUnknownNames)
{
    const std::vector<double> lam{1.0, 2.0, 3.0};
    const InitialData v = initial_data_preset("velocity", lam);
    EXPECT_EQ(v.s0.remainder, 0.0);
    EXPECT_EQ(v.s0.a[1], 0.0);
    EXPECT_GT(v.u0[0], 0.0);
    const InitialData r1 = initial_data_preset("random", lam, 4), r2 = initial_data_preset("random", lam, 4);
    EXPECT_EQ(r1.u0, r2.u0);
    EXPECT_THROW(initial_data_preset("rough", lam), ValidationError);
}
