#include <algorithm>
#include <charconv>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "fmx/report.hpp"
#include "fmx/scenario.hpp"
#include "fmx/suite.hpp"

using namespace fmx;
namespace fs = std::filesystem;

namespace {

std::string error_of(const std::string& text)
{
    try {
        parse_scenario_text(text, "test.json");
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST(Scenario, MinimalTextUsesDefaults)
{
    const Scenario s = parse_scenario_text(R"({"name": "m", "alpha": 0.2, "beta": 0.6})");
    EXPECT_EQ(s.name, "m");
    EXPECT_DOUBLE_EQ(s.params.alpha(), 0.2);
    EXPECT_DOUBLE_EQ(s.params.beta(), 0.6);
    EXPECT_EQ(s.basis.kind, BasisKind::Synthetic);
    EXPECT_EQ(s.probe.t_max, s.horizon);
    EXPECT_EQ(s.outputs.cases, std::vector<std::string>{"all"});
    const SpectralBasis b = s.basis.build();
    const InitialData d = s.initial_data(b);
    EXPECT_EQ(d.u0.size(), b.size());
}

TEST(Scenario, ExplicitCoefficientsAndBox)
{
    const Scenario s = parse_scenario_text(R"({
        "name": "box", "alpha": 0.45, "beta": 0.5,
        "basis": {"kind": "periodic_box", "max_wavevector": 1},
        "horizon": 5, "grid": {"steps": 50, "grading": 2},
        "outputs": {"theta": [0, 0.5], "gamma": [0.25], "cases": ["soc"]}
    })");
    const SpectralBasis b = s.basis.build();
    EXPECT_EQ(b.kind, BasisKind::PeriodicBox);
    EXPECT_EQ(b.size(), 12u);
    EXPECT_EQ(s.outputs.theta.size(), 2u);
    EXPECT_EQ(s.grid.steps, 50u);

    const Scenario c = parse_scenario_text(R"({"alpha": 0.3, "beta": 0.7, "basis": {"size": 2},
        "u0_coeffs": [1, 2], "S0_decomposition": {"a": [0.5, 0], "a_t": [0, 0.5], "remainder": 0.1}})");
    const InitialData d = c.initial_data(c.basis.build());
    EXPECT_EQ(d.u0, (std::vector<double>{1.0, 2.0}));
    EXPECT_DOUBLE_EQ(d.s0.remainder, 0.1);
}

TEST(Scenario, RejectsOrdersOutsideTheOpenTriangle)
{
    EXPECT_NE(error_of(R"({"alpha": 0.7, "beta": 0.4})").find("0<alpha<beta<1"), std::string::npos);
    EXPECT_NE(error_of(R"({"alpha": 0.5, "beta": 0.5})").find("0<alpha<beta<1"), std::string::npos);
    EXPECT_THROW(parse_scenario_text(R"({"alpha": 0.0, "beta": 0.5})"), ValidationError);
}

TEST(Scenario, NamesTheOffendingKey)
{
    EXPECT_NE(error_of(R"({"alpha": 0.3, "beta": 0.7, "horizn": 3})").find("'horizn'"), std::string::npos);
    EXPECT_NE(error_of(R"({"alpha": 0.3, "beta": 0.7, "grid": {"step": 3}})").find("'step'"), std::string::npos);
    EXPECT_NE(error_of(R"({"alpha": 0.3, "beta": 0.7, "horizon": "long"})").find("horizon"), std::string::npos);
    EXPECT_NE(error_of(R"({"alpha": 0.3})").find("'beta'"), std::string::npos);
    EXPECT_THROW(parse_scenario_text(R"({"alpha": 0.3, "beta": 0.7, "basis": {"size": 2}, "u0_coeffs": [1]})"),
                 ValidationError);
    EXPECT_THROW(parse_scenario_text(R"({"alpha": 0.3, "beta": 0.7, "u0_preset": "rough"})"), ValidationError);
    EXPECT_THROW(parse_scenario_text(R"({"alpha": 0.3, "beta": 0.7, "decay_window": [5, 2]})"), ValidationError);
}

TEST(Scenario, MalformedJsonReportsLineAndColumn)
{
    const std::string msg = error_of("{\n  \"alpha\": 0.3,\n  \"beta\": ,\n}");
    EXPECT_NE(msg.find("test.json"), std::string::npos) << msg;
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(Scenario, ShippedScenariosParse)
{
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(FMX_SCENARIO_DIR)) {
        if (e.path().extension() != ".json") continue;
        EXPECT_NO_THROW(parse_scenario(e.path().string())) << e.path();
        ++n;
    }
    EXPECT_GE(n, 3u);
    EXPECT_THROW(parse_scenario("/nonexistent/scenario.json"), ParseError);
}

TEST(Report, FormatDoubleRoundTrips)
{
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<std::uint64_t> bits;
    for (int i = 0; i < 10000; ++i) {
        double v;
        const std::uint64_t u = bits(rng);
        std::memcpy(&v, &u, sizeof v);
        if (!std::isfinite(v)) continue;
        const std::string s = format_double(v);
        double back = 0.0;
        std::from_chars(s.data(), s.data() + s.size(), back);
        EXPECT_EQ(std::memcmp(&v, &back, sizeof v), 0) << s;
    }
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(std::numeric_limits<double>::quiet_NaN()), "nan");
    EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
}

TEST(Report, WriteAtomicReplacesContent)
{
    const fs::path dir = fs::temp_directory_path() / "fmx_write_atomic_test";
    fs::remove_all(dir);
    const fs::path f = dir / "sub" / "x.txt";
    write_atomic(f, "first");
    write_atomic(f, "second");
    std::ifstream in(f);
    std::stringstream ss;
    ss << in.rdbuf();
    EXPECT_EQ(ss.str(), "second");
    EXPECT_FALSE(fs::exists(dir / "sub" / "x.txt.tmp"));
    fs::remove_all(dir);
}

TEST(Report, KernelTableLayoutIsStable)
{
    const KernelParams p(0.3, 0.7);
    const auto ts = log_lattice(1e-2, 10.0, 4);
    const std::string a = kernel_table(p, ts).str(), b = kernel_table(p, ts).str();
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.substr(0, a.find('\n')), "t,W0,Ealpha,rho");
    EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 5);
    CsvTable t({"a", "b"});
    const double bad[] = {1.0};
    EXPECT_THROW(t.add_row(bad), DomainError);
}

TEST(Report, JsonCarriesVerdictAndNonFiniteValues)
{
    EstimateReport r;
    r.name = "z";
    r.empirical_M = std::numeric_limits<double>::infinity();
    r.passed = false;
    r.note = "ratio unbounded on the probe lattice";
    r.slope_fit = SlopeFit{-0.5, -0.5, 1.0};
    EstimateReport q;
    q.name = "a";
    q.passed = true;
    const auto j = nlohmann::json::parse(reports_json({r, q}));
    ASSERT_TRUE(j.is_array());
    EXPECT_EQ(j[0]["name"], "a");
    EXPECT_EQ(j[0]["verdict"], "pass");
    EXPECT_EQ(j[1]["verdict"], "fail");
    EXPECT_EQ(j[1]["empirical_M"], "inf");
    EXPECT_TRUE(j[1].contains("slope_fit"));
    EXPECT_FALSE(j[0].contains("slope_fit"));
    const std::string svg = svg_loglog("t", std::vector<double>{1, 10}, std::vector<double>{1, 0.1}, -1.0);
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
}
