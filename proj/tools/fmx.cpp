// fmx: command-line driver for kernel tables, modal runs, field norms and the
// estimate suite. Artifacts go to <out>/<scenario>/<subcommand>/.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fmx/fmx.hpp"

namespace {

namespace fs = std::filesystem;

struct Globals {
    std::string scenario_path;
    std::string out;
    std::size_t threads = 0;
    double tol_override = 0.0;
};

struct Context {
    fmx::Scenario scenario;
    fmx::RunOptions options;
    fs::path root;

    [[nodiscard]] fs::path dir(const char* sub) const { return root / scenario.name / sub; }
};

Context make_context(const Globals& g, std::optional<double> alpha, std::optional<double> beta)
{
    Context c;
    if (!g.scenario_path.empty()) {
        c.scenario = fmx::parse_scenario(g.scenario_path);
    } else {
        c.scenario.name = "default";
        c.scenario.probe.t_max = c.scenario.horizon;
    }
    if (alpha || beta)
        c.scenario.params = fmx::KernelParams(alpha.value_or(c.scenario.params.alpha()), beta.value_or(c.scenario.params.beta()));
    if (g.threads > 0) {
        c.options.volterra.threads = g.threads;
        ::setenv("FMX_THREADS", std::to_string(g.threads).c_str(), 1);
    }
    if (g.tol_override > 0.0) c.options.override_tolerance(g.tol_override);
    c.root = g.out.empty() ? fs::path(c.scenario.outputs.dir) : fs::path(g.out);
    return c;
}

void emit(const fs::path& path, const std::string& content)
{
    fmx::write_atomic(path, content);
    std::cout << "wrote " << path.string() << "\n";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Fractional Maxwell fluid toolkit: kernels, modal solves, field norms and estimate checks"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--scenario", g.scenario_path, "Scenario file (JSON)")->check(CLI::ExistingFile);
    app.add_option("--out", g.out, "Output root directory (default: outputs.dir of the scenario)");
    app.add_option("--threads", g.threads, "Worker threads (default: FMX_THREADS or hardware concurrency)");
    app.add_option("--tol-override", g.tol_override, "Absolute and relative tolerance for every quadrature");

    std::optional<double> alpha, beta;
    auto add_orders = [&](CLI::App* sub) {
        sub->add_option("--alpha", alpha, "Order alpha");
        sub->add_option("--beta", beta, "Order beta");
    };

    // kernels table
    auto* kernels = app.add_subcommand("kernels", "Kernel evaluation")->require_subcommand(1)->fallthrough();
    auto* ktable = kernels->add_subcommand("table", "CSV of t, W0, Ealpha, rho on a log lattice")->fallthrough();
    add_orders(ktable);
    double t_min = 1e-3, t_max = 1e3;
    std::size_t points = 31;
    ktable->add_option("--t-min", t_min, "Smallest time")->capture_default_str();
    ktable->add_option("--t-max", t_max, "Largest time")->capture_default_str();
    ktable->add_option("--points", points, "Number of log-spaced times")->capture_default_str();

    // modal run
    auto* modal = app.add_subcommand("modal", "Single-mode trajectories")->require_subcommand(1)->fallthrough();
    auto* mrun = modal->add_subcommand("run", "CSV of k, t, alpha_k, rho_conv, dalpha, d2alpha")->fallthrough();
    add_orders(mrun);
    std::vector<double> lambdas{1.0}, alpha0{1.0}, bdata{0.0};
    double horizon = 10.0, grading = 3.0;
    std::size_t nodes = 1000;
    mrun->add_option("--lambdas", lambdas, "Eigenvalues")->capture_default_str();
    mrun->add_option("--alpha0", alpha0, "Initial velocity coefficients (one per eigenvalue)")->capture_default_str();
    mrun->add_option("--b", bdata, "Stress data coefficients (one per eigenvalue)")->capture_default_str();
    mrun->add_option("--horizon", horizon, "Final time")->capture_default_str();
    mrun->add_option("--nodes", nodes, "Number of grid steps")->capture_default_str();
    mrun->add_option("--grading", grading, "Grading exponent of the mesh")->capture_default_str();

    // field run
    auto* field = app.add_subcommand("field", "Assembled fields")->require_subcommand(1)->fallthrough();
    auto* frun = field->add_subcommand("run", "CSV of t and the requested H, D and Delta norms")->fallthrough();

    // estimates run
    auto* est = app.add_subcommand("estimates", "Estimate suite")->require_subcommand(1)->fallthrough();
    auto* erun = est->add_subcommand("run", "Run estimate cases; exit 0 iff all pass")->fallthrough();
    std::vector<std::string> cases;
    erun->add_option("--cases", cases, "Case names, family prefixes, or 'all' (default: outputs.cases of the scenario)");
    bool list = false;
    erun->add_flag("--list", list, "Print the available case names and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (ktable->parsed()) {
            const Context c = make_context(g, alpha, beta);
            const auto ts = fmx::log_lattice(t_min, t_max, points);
            emit(c.dir("kernels") / "table.csv", fmx::kernel_table(c.scenario.params, ts, c.options.quad).str());
            return 0;
        }
        if (mrun->parsed()) {
            const Context c = make_context(g, alpha, beta);
            if (alpha0.size() == 1 && lambdas.size() > 1) alpha0.assign(lambdas.size(), alpha0[0]);
            if (bdata.size() == 1 && lambdas.size() > 1) bdata.assign(lambdas.size(), bdata[0]);
            const fmx::ModalProblem P(c.scenario.params, lambdas, alpha0, bdata);
            const fmx::ModalRun run = fmx::solve_modal_run(P, fmx::TimeGrid(horizon, nodes, grading), c.options.volterra);
            emit(c.dir("modal") / "trajectories.csv", fmx::modal_table(run.traj).str());
            return 0;
        }
        if (frun->parsed()) {
            const Context c = make_context(g, std::nullopt, std::nullopt);
            emit(c.dir("field") / "norms.csv", fmx::field_table(c.scenario, c.options).str());
            return 0;
        }
        if (erun->parsed()) {
            const Context c = make_context(g, std::nullopt, std::nullopt);
            if (list) {
                for (const auto& n : fmx::case_names(c.scenario.params)) std::cout << n << "\n";
                return 0;
            }
            const std::vector<std::string> sel = cases.empty() ? c.scenario.outputs.cases : cases;
            const auto names = fmx::select_cases(c.scenario.params, sel);
            const auto reports = fmx::run_estimates(c.scenario, names, c.options);
            const fs::path dir = c.dir("estimates");
            const std::string table = fmx::reports_table(reports);
            std::cout << table;
            emit(dir / "reports.json", fmx::reports_json(reports));
            emit(dir / "table.txt", table);
            for (const auto& r : reports)
                if (r.slope_fit && r.sample_x.size() >= 2)
                    emit(dir / (r.name + ".svg"), fmx::svg_loglog(r.name, r.sample_x, r.sample_y, r.slope_fit->predicted));
            int failed = 0;
            for (const auto& r : reports)
                if (!r.passed) {
                    std::cerr << "FAILED " << r.name << (r.note.empty() ? "" : ": " + r.note) << "\n";
                    ++failed;
                }
            if (failed) std::cerr << failed << " of " << reports.size() << " cases failed\n";
            return failed ? 1 : 0;
        }
    } catch (const fmx::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const fmx::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
