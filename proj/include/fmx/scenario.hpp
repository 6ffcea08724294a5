#pragma once

// Scenario files: JSON objects naming the kernel orders, the spectral basis,
// the initial data, the time grid and the requested outputs.

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fmx/error.hpp"
#include "fmx/estimates.hpp"
#include "fmx/field.hpp"
#include "fmx/params.hpp"

namespace fmx {

struct BasisSpec {
    BasisKind kind = BasisKind::Synthetic;
    /// Number of modes. For the periodic box, the shells up to max_wavevector
    /// are truncated to this count when it is nonzero.
    std::size_t size = 64;
    double c = 1.0;
    int max_wavevector = 2;

    [[nodiscard]] SpectralBasis build() const
    {
        if (kind == BasisKind::Synthetic) return synthetic_basis(size, c);
        return build_periodic_basis(max_wavevector, size);
    }
};

struct OutputSpec {
    std::vector<double> theta{0.0};
    std::vector<double> gamma{0.0};
    /// Estimate case names, or {"all"}.
    std::vector<std::string> cases{"all"};
    std::string dir = "outputs";
};

struct Scenario {
    std::string name = "scenario";
    KernelParams params{0.3, 0.7};
    BasisSpec basis;
    std::optional<std::vector<double>> u0_coeffs;
    std::string u0_preset = "smooth";
    std::optional<StressDecomposition> S0;
    std::string S0_preset = "smooth";
    double horizon = 1000.0;
    StudyGrid grid;
    ProbeSettings probe;
    /// mu values for the contour-integral cases and for the mu-slope fit.
    std::vector<double> contour_mus{1.0, 10.0, 100.0};
    std::vector<double> slope_mus{1.0, 10.0, 100.0, 1e3, 1e4};
    /// Window of the velocity decay fit; shrinks to [T/100, T] when T < 100 and none is given.
    double decay_t_lo = 1.0;
    double decay_t_hi = 100.0;
    OutputSpec outputs;

    /// Initial data on the given basis: explicit coefficients win over presets.
    [[nodiscard]] InitialData initial_data(const SpectralBasis& b) const
    {
        InitialData u = initial_data_preset(u0_preset, b.lambdas);
        InitialData s = initial_data_preset(S0_preset, b.lambdas);
        InitialData out{u.u0, s.s0};
        if (u0_coeffs) {
            if (u0_coeffs->size() != b.size())
                throw ValidationError("u0_coeffs has " + std::to_string(u0_coeffs->size()) + " entries for " +
                                      std::to_string(b.size()) + " modes");
            out.u0 = *u0_coeffs;
        }
        if (S0) {
            if (S0->a.size() != b.size() || S0->a_t.size() != b.size())
                throw ValidationError("S0_decomposition does not match the basis size " + std::to_string(b.size()));
            out.s0 = *S0;
        }
        return out;
    }
};

inline void validate(const Scenario& s);

namespace detail {

using json = nlohmann::json;

inline void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where)
{
    for (const auto& [key, _] : obj.items())
        if (!allowed.contains(key)) throw ParseError("unknown key '" + key + "' in " + where);
}

template <class T>
T get_as(const json& obj, const std::string& key, const std::string& where)
{
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError("key '" + where + key + "': " + e.what());
    }
}

template <class T>
void read_opt(const json& obj, const std::string& key, T& out, const std::string& where = "")
{
    if (obj.contains(key)) out = get_as<T>(obj, key, where);
}

inline void require_object(const json& j, const std::string& where)
{
    if (!j.is_object()) throw ParseError("'" + where + "' must be an object");
}

inline std::string line_context(const std::string& text, std::size_t byte)
{
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

} // namespace detail

/// Parses scenario text. `origin` names the source in error messages.
inline Scenario parse_scenario_text(const std::string& text, const std::string& origin = "<scenario>")
{
    using detail::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(origin + ": " + detail::line_context(text, e.byte) + ": " + e.what());
    }
    detail::require_object(j, "scenario");
    detail::reject_unknown(j,
                           {"name", "alpha", "beta", "basis", "u0_coeffs", "u0_preset", "S0_decomposition", "S0_preset",
                            "horizon", "grid", "probe", "contour_mus", "slope_mus", "decay_window", "outputs"},
                           "scenario");
    Scenario s;
    detail::read_opt(j, "name", s.name);
    if (!j.contains("alpha") || !j.contains("beta")) throw ParseError(origin + ": keys 'alpha' and 'beta' are required");
    s.params = KernelParams(detail::get_as<double>(j, "alpha", ""), detail::get_as<double>(j, "beta", ""));

    if (j.contains("basis")) {
        const json& b = j["basis"];
        detail::require_object(b, "basis");
        detail::reject_unknown(b, {"kind", "size", "c", "max_wavevector"}, "basis");
        const std::string kind = b.value("kind", std::string("synthetic"));
        if (kind == "synthetic") s.basis.kind = BasisKind::Synthetic;
        else if (kind == "periodic_box") s.basis.kind = BasisKind::PeriodicBox;
        else throw ParseError("key 'basis.kind': expected 'synthetic' or 'periodic_box', got '" + kind + "'");
        detail::read_opt(b, "size", s.basis.size, "basis.");
        detail::read_opt(b, "c", s.basis.c, "basis.");
        detail::read_opt(b, "max_wavevector", s.basis.max_wavevector, "basis.");
        if (s.basis.kind == BasisKind::PeriodicBox && !b.contains("size")) s.basis.size = 0;
    }
    if (j.contains("u0_coeffs") && j.contains("u0_preset"))
        throw ParseError("keys 'u0_coeffs' and 'u0_preset' are mutually exclusive");
    if (j.contains("S0_decomposition") && j.contains("S0_preset"))
        throw ParseError("keys 'S0_decomposition' and 'S0_preset' are mutually exclusive");
    if (j.contains("u0_coeffs")) s.u0_coeffs = detail::get_as<std::vector<double>>(j, "u0_coeffs", "");
    detail::read_opt(j, "u0_preset", s.u0_preset);
    detail::read_opt(j, "S0_preset", s.S0_preset);
    if (j.contains("S0_decomposition")) {
        const json& d = j["S0_decomposition"];
        detail::require_object(d, "S0_decomposition");
        detail::reject_unknown(d, {"a", "a_t", "remainder"}, "S0_decomposition");
        StressDecomposition sd;
        sd.a = detail::get_as<std::vector<double>>(d, "a", "S0_decomposition.");
        sd.a_t = detail::get_as<std::vector<double>>(d, "a_t", "S0_decomposition.");
        detail::read_opt(d, "remainder", sd.remainder, "S0_decomposition.");
        s.S0 = std::move(sd);
    }
    detail::read_opt(j, "horizon", s.horizon);
    s.probe.t_max = s.horizon;
    if (j.contains("grid")) {
        const json& g = j["grid"];
        detail::require_object(g, "grid");
        detail::reject_unknown(g, {"steps", "grading"}, "grid");
        detail::read_opt(g, "steps", s.grid.steps, "grid.");
        detail::read_opt(g, "grading", s.grid.grading, "grid.");
    }
    if (j.contains("probe")) {
        const json& p = j["probe"];
        detail::require_object(p, "probe");
        detail::reject_unknown(p, {"t_min", "points", "drift_limit", "slope_tolerance", "min_r2"}, "probe");
        detail::read_opt(p, "t_min", s.probe.t_min, "probe.");
        detail::read_opt(p, "points", s.probe.points, "probe.");
        detail::read_opt(p, "drift_limit", s.probe.drift_limit, "probe.");
        detail::read_opt(p, "slope_tolerance", s.probe.slope_tolerance, "probe.");
        detail::read_opt(p, "min_r2", s.probe.min_r2, "probe.");
    }
    detail::read_opt(j, "contour_mus", s.contour_mus);
    detail::read_opt(j, "slope_mus", s.slope_mus);
    if (j.contains("decay_window")) {
        const auto w = detail::get_as<std::vector<double>>(j, "decay_window", "");
        if (w.size() != 2) throw ParseError("key 'decay_window': expected [t_lo, t_hi]");
        s.decay_t_lo = w[0];
        s.decay_t_hi = w[1];
    } else if (s.horizon < s.decay_t_hi) {
        s.decay_t_lo = s.horizon / 100.0;
        s.decay_t_hi = s.horizon;
    }
    if (j.contains("outputs")) {
        const json& o = j["outputs"];
        detail::require_object(o, "outputs");
        detail::reject_unknown(o, {"theta", "gamma", "cases", "dir"}, "outputs");
        detail::read_opt(o, "theta", s.outputs.theta, "outputs.");
        detail::read_opt(o, "gamma", s.outputs.gamma, "outputs.");
        detail::read_opt(o, "cases", s.outputs.cases, "outputs.");
        detail::read_opt(o, "dir", s.outputs.dir, "outputs.");
    }
    validate(s);
    return s;
}

/// Checks everything that does not need a solve.
inline void validate(const Scenario& s)
{
    if (s.name.empty() || s.name.find_first_of("/\\") != std::string::npos)
        throw ValidationError("scenario name must be a non-empty path component");
    if (s.basis.kind == BasisKind::Synthetic && s.basis.size == 0) throw ValidationError("basis.size must be positive");
    if (!(s.basis.c > 0.0)) throw ValidationError("basis.c must be positive");
    if (s.basis.kind == BasisKind::PeriodicBox && s.basis.max_wavevector < 1)
        throw ValidationError("basis.max_wavevector must be at least 1");
    if (!(s.horizon > s.probe.t_min && s.probe.t_min > 0.0)) throw ValidationError("need 0 < probe.t_min < horizon");
    if (s.probe.points < 2) throw ValidationError("probe.points must be at least 2");
    if (s.grid.steps < 2 || !(s.grid.grading >= 1.0)) throw ValidationError("grid needs steps >= 2 and grading >= 1");
    if (s.contour_mus.empty() || s.slope_mus.size() < 2) throw ValidationError("contour_mus and slope_mus must be non-empty");
    for (double m : s.contour_mus)
        if (!(m > 0.0)) throw ValidationError("contour_mus entries must be positive");
    for (double m : s.slope_mus)
        if (!(m > 0.0)) throw ValidationError("slope_mus entries must be positive");
    if (!(0.0 < s.decay_t_lo && s.decay_t_lo < s.decay_t_hi && s.decay_t_hi <= s.horizon))
        throw ValidationError("decay_window must satisfy 0 < t_lo < t_hi <= horizon");
    for (const std::string& p : {s.u0_preset, s.S0_preset})
        if (p != "smooth" && p != "random" && p != "velocity" && p != "stress")
            throw ValidationError("unknown initial data preset '" + p + "'");
    if (s.u0_coeffs || s.S0) (void)s.initial_data(s.basis.build());
}

inline Scenario parse_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario_text(ss.str(), path);
}

} // namespace fmx
