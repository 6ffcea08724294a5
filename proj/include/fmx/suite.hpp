#pragma once

// Orchestration shared by the command-line tool: tables of kernels, modal
// trajectories and field norms, and selection and evaluation of estimate cases.

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "fmx/estimates.hpp"
#include "fmx/field.hpp"
#include "fmx/kernels.hpp"
#include "fmx/modal.hpp"
#include "fmx/report.hpp"
#include "fmx/scenario.hpp"

namespace fmx {

struct RunOptions {
    VolterraOptions volterra;
    BromwichOptions bromwich;
    QuadratureSpec quad;

    /// Replaces the absolute and relative tolerance of every quadrature.
    void override_tolerance(double tol)
    {
        if (!(tol > 0.0)) throw ValidationError("tolerance override must be positive");
        bromwich.abs_tol = tol;
        bromwich.rel_tol = tol;
        quad = quad.with_tol(tol);
    }
};

inline CsvTable kernel_table(const KernelParams& p, std::span<const double> ts, const QuadratureSpec& q = {})
{
    CsvTable tab({"t", "W0", "Ealpha", "rho"});
    for (double t : ts) {
        const double row[] = {t, eval_W0(t, p, q), eval_Ealpha(t, p, q), eval_rho(t, p, q)};
        tab.add_row(row);
    }
    return tab;
}

/// One row per (mode, node); d2alpha is NaN where undefined.
inline CsvTable modal_table(std::span<const ModalTrajectory> traj)
{
    CsvTable tab({"k", "t", "alpha_k", "rho_conv", "dalpha", "d2alpha"});
    for (const ModalTrajectory& tr : traj)
        for (std::size_t n = 0; n < tr.grid.size(); ++n) {
            const double row[] = {static_cast<double>(tr.k), tr.grid[n], tr.alpha[n], tr.rho_conv[n], tr.dalpha[n],
                                  tr.d2alpha[n]};
            tab.add_row(row);
        }
    return tab;
}

inline std::string param_label(const char* what, double v) { return std::string(what) + "=" + format_double(v); }

/// ||u||_{H_theta}, ||S||_{D_gamma} and ||S||_{Delta_theta} on the probe lattice.
inline CsvTable field_table(const Scenario& s, const RunOptions& opt = {})
{
    const SpectralBasis basis = s.basis.build();
    const InitialData data = s.initial_data(basis);
    const ModalProblem P = project_initial_data(s.params, basis.lambdas, data.u0, data.s0);
    const ModalRun run = solve_modal_run(P, TimeGrid(s.horizon, s.grid.steps, s.grid.grading), opt.volterra);
    std::vector<std::string> header{"t"};
    for (double th : s.outputs.theta) header.push_back("H_" + param_label("theta", th));
    for (double g : s.outputs.gamma) header.push_back("D_" + param_label("gamma", g));
    for (double th : s.outputs.theta) header.push_back("Delta_" + param_label("theta", th));
    CsvTable tab(header);
    std::vector<double> ts{0.0};
    for (double t : log_lattice(s.probe.t_min, s.horizon, s.probe.points)) ts.push_back(t);
    for (double t : ts) {
        VelocityField u{P.lambdas, data.u0, 0.0};
        StressField S{P.lambdas, std::vector<double>(P.size(), 0.0), 1.0, data.s0, 0.0};
        if (t > 0.0) std::tie(u, S) = fields_at(P, run, data.s0, t, eval_W0(t, s.params, opt.quad));
        const StressCoordinates c = S.coordinates();
        std::vector<double> row{t};
        for (double th : s.outputs.theta) row.push_back(norm_H(u, th));
        for (double g : s.outputs.gamma) row.push_back(norm_D(c, g));
        for (double th : s.outputs.theta) row.push_back(norm_Delta(c, th));
        tab.add_row(row);
    }
    return tab;
}

/// Every case the suite knows for these orders: the lattice cases plus
/// the slope fits "sol5" and "decay_u".
inline std::vector<std::string> case_names(const KernelParams& p)
{
    std::vector<std::string> out;
    for (const EstimateCase& c : default_cases(p)) out.push_back(c.name);
    out.emplace_back("sol5");
    out.emplace_back("decay_u");
    return out;
}

/// A selector matches a case name exactly, or as a prefix ending at '.' or '['.
inline bool selector_matches(const std::string& sel, const std::string& name)
{
    if (sel == "all" || sel == name) return true;
    if (name.size() <= sel.size() || name.compare(0, sel.size(), sel) != 0) return false;
    const char next = name[sel.size()];
    return next == '.' || next == '[';
}

inline std::vector<std::string> select_cases(const KernelParams& p, std::span<const std::string> selectors)
{
    const std::vector<std::string> all = case_names(p);
    std::vector<std::string> out;
    for (const std::string& sel : selectors) {
        bool any = false;
        for (const std::string& n : all)
            if (selector_matches(sel, n)) {
                any = true;
                if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
            }
        if (!any) throw ValidationError("unknown estimate case '" + sel + "'");
    }
    return out;
}

/// Runs the named cases. Shared solves are built only for the families that
/// are requested. Reports come back in the order of `names`.
inline std::vector<EstimateReport> run_estimates(const Scenario& s, std::span<const std::string> names,
                                                 const RunOptions& opt = {})
{
    const KernelParams& p = s.params;
    std::vector<EstimateCase> lattice;
    bool decay = false;
    for (const std::string& n : names) {
        if (n == "sol5") continue;
        if (n == "decay_u") decay = true;
        else {
            bool found = false;
            for (const EstimateCase& c : default_cases(p))
                if (c.name == n) {
                    lattice.push_back(c);
                    found = true;
                }
            if (!found) throw ValidationError("unknown estimate case '" + n + "'");
        }
    }
    auto wants = [&](std::initializer_list<Family> fs) {
        for (const EstimateCase& c : lattice)
            for (Family f : fs)
                if (c.family == f) return true;
        return false;
    };
    std::optional<Study> study;
    std::optional<FieldStudy> field;
    std::optional<ContourTable> contour;
    if (wants({Family::Sot1, Family::Sxl3, Family::Smoothness}))
        study.emplace(probe_problem(p), s.probe, s.grid, opt.volterra);
    if (wants({Family::Soc, Family::Ut22}) || decay) {
        const SpectralBasis basis = s.basis.build();
        field.emplace(p, basis.lambdas, s.initial_data(basis), s.probe, s.grid, opt.volterra);
    }
    if (wants({Family::Ie1})) contour.emplace(p, s.contour_mus, s.probe, opt.bromwich);

    std::vector<EstimateReport> out;
    for (const std::string& n : names) {
        if (n == "sol5") {
            out.push_back(check_sol5(p, s.slope_mus, s.probe));
            continue;
        }
        if (n == "decay_u") {
            const Study& st = field->study();
            out.push_back(check_decay_u(st.problem(), st.base().traj, field->data().s0, s.decay_t_lo, s.decay_t_hi, 21,
                                        s.probe));
            continue;
        }
        const auto it = std::find_if(lattice.begin(), lattice.end(), [&](const EstimateCase& c) { return c.name == n; });
        const EstimateCase& c = *it;
        switch (c.family) {
        case Family::Sot1: out.push_back(check_sot1(*study, c)); break;
        case Family::Sxl3: out.push_back(check_sxl3(*study, c)); break;
        case Family::Smoothness: out.push_back(check_smoothness(*study, c)); break;
        case Family::Soc: out.push_back(check_soc(*field, c)); break;
        case Family::Ut22: out.push_back(check_ut22(*field, c)); break;
        case Family::Ie1: out.push_back(check_ie1(*contour, c)); break;
        }
    }
    return out;
}

} // namespace fmx
