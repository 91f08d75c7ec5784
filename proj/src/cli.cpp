#include "kgfilon/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "kgfilon/filon.hpp"
#include "kgfilon/harness.hpp"

namespace kgfilon {

namespace {

struct Options {
    std::string problem = "example1";
    double omega = 10.0;
    std::vector<double> omegas;
    std::vector<long> steps;
    std::vector<std::string> methods;
    int grid_m = 200;
    double t_final = 1.0;
    long ref_steps = 100000;
    std::string out;
    std::string dump_state;
    double h = 0.0;
    double m0 = -1.0;
    int timing_repeats = 3;
};

struct Flags {
    CLI::Option* problem = nullptr;
    CLI::Option* omega = nullptr;
    CLI::Option* omegas = nullptr;
    CLI::Option* steps = nullptr;
    CLI::Option* methods = nullptr;
    CLI::Option* ref_steps = nullptr;
    CLI::Option* out = nullptr;
    CLI::Option* dump_state = nullptr;
    CLI::Option* h = nullptr;
    CLI::Option* m0 = nullptr;
    CLI::Option* timing = nullptr;
};

bool given(const CLI::Option* o) { return o != nullptr && o->count() > 0; }

void reject(bool bad, const std::string& what) {
    if (bad) throw InvalidArgument(what);
}

/// Registers the flags a subcommand accepts. Flags that are meaningless for a
/// subcommand are not registered, so the parser rejects them as unknown.
Flags add_flags(CLI::App* sub, Options& o, bool experiment, bool solve_flags, bool sweep_flags,
                bool moment_flags) {
    Flags f;
    if (!moment_flags) {
        f.problem = sub->add_option("--problem", o.problem, "example1 | example2 | constant_mass | free");
        f.steps = sub->add_option("--steps", o.steps, "step counts K (comma separated)")->delimiter(',');
        f.methods = sub->add_option("--methods", o.methods, "method ids (comma separated)")->delimiter(',');
        sub->add_option("--grid-m", o.grid_m, "number of grid nodes M (even)");
        sub->add_option("--t-final", o.t_final, "final time T (start at 0)");
        f.ref_steps = sub->add_option("--ref-steps", o.ref_steps, "reference step count");
        f.out = sub->add_option("--out", o.out, "output CSV path (default stdout)");
        f.m0 = sub->add_option("--m0", o.m0, "constant mass for constant_mass");
    }
    if (!sweep_flags) f.omega = sub->add_option("--omega", o.omega, "frequency omega");
    if (sweep_flags)
        f.omegas = sub->add_option("--omegas", o.omegas, "frequencies (comma separated)")
                       ->delimiter(',')
                       ->required();
    if (solve_flags) f.dump_state = sub->add_option("--dump-state", o.dump_state, "final state CSV path");
    if (experiment)
        f.timing = sub->add_option("--timing-repeats", o.timing_repeats,
                                   "wall-clock repetitions per run, 0 disables timing");
    if (moment_flags) {
        sub->set_help_flag("--help", "print this help message and exit");  // frees -h
        f.omega->required();
        f.h = sub->add_option("--h", o.h, "step size h")->required();
    }
    return f;
}

void write_text(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw Error("cannot open '" + path + "' for writing");
    file << text;
    file.flush();
    if (!file) throw Error("failed writing '" + path + "'");
}

ExperimentConfig experiment_config(const Options& o, const Flags& f,
                                   std::vector<std::string> default_methods) {
    ExperimentConfig cfg;
    cfg.problem = parse_problem(o.problem);
    const bool oscillatory = cfg.problem == Problem::example1;
    reject(given(f.omega) && !oscillatory,
           "--omega only applies to example1, not " + o.problem);
    reject(given(f.m0) && cfg.problem != Problem::constant_mass, "--m0 only applies to constant_mass");
    reject(given(f.ref_steps) &&
               (cfg.problem == Problem::free || cfg.problem == Problem::constant_mass),
           "--ref-steps does not apply to " + o.problem + " (exact solution)");
    cfg.omega = o.omega;
    cfg.m0 = o.m0;
    cfg.grid_m = o.grid_m;
    cfg.t_final = o.t_final;
    if (!o.steps.empty()) cfg.steps_list = o.steps;
    cfg.methods.clear();
    for (const auto& id : o.methods.empty() ? default_methods : o.methods)
        cfg.methods.push_back(parse_method(id));
    cfg.reference.steps = o.ref_steps;
    cfg.out_path = o.out;
    cfg.timing_repeats = o.timing_repeats;
    return cfg;
}

int run_solve(const Options& o, const Flags& f, std::ostream& out) {
    ExperimentConfig cfg = experiment_config(o, f, {"xi3-filon"});
    reject(cfg.methods.size() != 1, "solve takes exactly one method");
    reject(o.steps.size() > 1, "solve takes exactly one step count");
    reject(given(f.out) && given(f.dump_state), "use either --out or --dump-state, not both");
    const long k = o.steps.empty() ? 100 : o.steps.front();
    reject(k <= 0, "step count must be positive");
    reject(!(cfg.t_final > 0.0), "t_final must be positive");
    const SpectralGrid grid = build_grid(cfg.x0, cfg.x1, cfg.grid_m);
    const MassModel model = make_model(cfg);
    const FieldState s0 = gaussian_initial_state(grid, 0.0);
    const FieldState s = solve(cfg.methods.front(), grid, model, s0, cfg.t_final / static_cast<double>(k), k);
    write_text(format_state_csv(grid, s), given(f.dump_state) ? o.dump_state : o.out, out);
    return 0;
}

int run_experiment(const Options& o, const Flags& f, std::vector<std::string> default_methods,
                   std::ostream& out) {
    const ExperimentConfig cfg = experiment_config(o, f, std::move(default_methods));
    const auto records = run_convergence(cfg);
    write_text(format_csv(records), cfg.out_path, out);
    return 0;
}

int run_sweep(const Options& o, const Flags& f, std::ostream& out) {
    reject(o.problem != "example1", "omega-sweep requires --problem example1");
    const ExperimentConfig cfg = experiment_config(o, f, {"xi3-filon"});
    const auto records = run_omega_sweep(cfg, o.omegas);
    write_text(format_csv(records), cfg.out_path, out);
    return 0;
}

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int run_moments(const Options& o, std::ostream& out) {
    const OscillatoryMoments m = moments(o.omega, o.h);
    std::ostringstream os;
    os << "j,re_mu,im_mu\n";
    const Complex mu[3] = {m.mu1, m.mu2, m.mu3};
    for (int j = 0; j < 3; ++j)
        os << (j + 1) << ',' << format_full(mu[j].real()) << ',' << format_full(mu[j].imag()) << '\n';
    out << os.str();
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Klein-Gordon solver with Filon-type exponential integration"};
    app.require_subcommand(1);
    Options o;

    auto* solve_cmd = app.add_subcommand("solve", "integrate one problem and write the final state");
    auto* conv_cmd = app.add_subcommand("convergence", "errors and slopes over a list of step counts");
    auto* sweep_cmd = app.add_subcommand("omega-sweep", "convergence for several frequencies (example1)");
    auto* cmp_cmd = app.add_subcommand("compare", "convergence of several methods side by side");
    auto* mom_cmd = app.add_subcommand("moments", "print the Filon moments mu_1..mu_3 for (omega, h)");

    const Flags solve_f = add_flags(solve_cmd, o, false, true, false, false);
    const Flags conv_f = add_flags(conv_cmd, o, true, false, false, false);
    const Flags sweep_f = add_flags(sweep_cmd, o, true, false, true, false);
    const Flags cmp_f = add_flags(cmp_cmd, o, true, false, false, false);
    add_flags(mom_cmd, o, false, false, false, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (solve_cmd->parsed()) return run_solve(o, solve_f, out);
        if (conv_cmd->parsed()) return run_experiment(o, conv_f, {"xi3-filon"}, out);
        if (sweep_cmd->parsed()) return run_sweep(o, sweep_f, out);
        if (cmp_cmd->parsed()) return run_experiment(o, cmp_f, {"rk2", "rk4", "xi3-filon"}, out);
        if (mom_cmd->parsed()) return run_moments(o, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    err << "error: no subcommand\n";
    return 2;
}

}  // namespace kgfilon
