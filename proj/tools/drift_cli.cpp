// drift: command-line front end for the drifting-Laplacian experiments.
//
// Exit codes:
//   0  run completed (including "bound not applicable")
//   1  a pipeline stage failed (see report.json "error")
//   2  invalid command line or configuration file
//   3  run completed but a verdict failed

#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "drift/errors.hpp"
#include "drift/experiment.hpp"

namespace {

constexpr int kExitStageError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitVerdictFailed = 3;

struct FlagSpec {
    const char* flag;
    const char* key;
    const char* help;
};

// Config keys exposed as flags on every subcommand. Flags are applied in
// this order after any --config file.
constexpr FlagSpec kFlags[] = {
    {"--surface", "surface", "sphere-linear | torus-cosine | off"},
    {"--radius", "radius", "sphere radius"},
    {"--slope", "slope", "sphere potential f = slope * x3"},
    {"--period-u", "period_u", "torus period in u"},
    {"--period-v", "period_v", "torus period in v"},
    {"--amplitude", "amplitude", "torus potential f = amplitude * cos(2 pi u / period_u)"},
    {"--mesh", "mesh_path", "OFF mesh for surface=off"},
    {"--potential", "potential_path", "per-vertex potential CSV for surface=off"},
    {"--initial", "initial_path", "per-vertex initial data CSV for heat"},
    {"--subdiv", "subdiv", "icosphere subdivision level"},
    {"--grid", "grid", "torus cells per direction"},
    {"--levels", "levels", "comma-separated resolutions for converge"},
    {"--tol", "tol", "eigen residual tolerance"},
    {"--solver", "solver", "auto | dense | iterative"},
    {"--eig-count", "eig_count", "number of eigenpairs reported"},
    {"--z-count", "z_count", "z grid size"},
    {"--z-min", "z_min", "smallest z"},
    {"--z-max", "z_max", "largest z"},
    {"--z-log", "z_log", "log spacing (true/false)"},
    {"--samples", "samples", "curvature scan samples"},
    {"--slack", "slack", "relative slack for the eigenvalue bound"},
    {"--c", "c", "zeroth-order heat coefficient"},
    {"--dt", "dt", "time step"},
    {"--t-end", "t_end", "final time"},
    {"--p-list", "p_list", "comma-separated energy exponents"},
    {"--integrator", "integrator", "implicit-euler | spectral"},
    {"--record-every", "record_every", "record stride in steps"},
    {"--heat-tol", "heat_tol", "relative tolerance for the decay check"},
    {"--runs", "runs", "number of random initial conditions"},
    {"--K", "K", "override the curvature constant K"},
    {"--seed", "seed", "random seed"},
    {"--out", "out", "output directory"},
};

struct Subcommand {
    CLI::App* app = nullptr;
    std::string config_path;
    std::map<std::string, std::string> values;
    std::vector<std::string> overrides;
};

void add_common_flags(Subcommand& sub) {
    sub.app->add_option("--config", sub.config_path, "key=value configuration file");
    sub.app->add_option("--set", sub.overrides, "extra key=value settings");
    for (const auto& spec : kFlags) sub.app->add_option(spec.flag, sub.values[spec.key], spec.help);
}

drift::ExperimentConfig resolve_config(const Subcommand& sub) {
    drift::ExperimentConfig cfg;
    if (!sub.config_path.empty()) cfg = drift::load_config_file(sub.config_path);
    for (const auto& spec : kFlags) {
        if (sub.app->count(spec.flag) > 0) drift::apply_setting(cfg, spec.key, sub.values.at(spec.key));
    }
    for (const auto& kv : sub.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw drift::ConfigError("--set expects key=value, got " + kv);
        drift::apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
}

void print_summary(const drift::RunReport& report) {
    if (report.error) {
        std::cerr << "stage '" << report.error->stage << "' failed: " << report.error->message << '\n';
    }
    if (report.mesh_diagnostics) {
        const auto& d = *report.mesh_diagnostics;
        std::cerr << "mesh: " << report.vertex_count << " vertices, " << report.triangle_count
                  << " triangles, chi = " << d.euler_characteristic
                  << (d.usable() ? "" : " (not usable for assembly)") << '\n';
    }
    if (report.eigen) std::cerr << "lambda1 = " << report.eigen->lambda1 << '\n';
    if (report.theorem1) {
        std::cerr << "eigenvalue bound: " << drift::to_string(report.theorem1->status);
        if (report.theorem1->best_bound) std::cerr << " (bound " << *report.theorem1->best_bound << ")";
        std::cerr << '\n';
    }
    if (report.theorem2) {
        std::cerr << "energy decay: " << drift::to_string(report.theorem2->status)
                  << " (K = " << report.theorem2->K << ")\n";
    }
    if (report.convergence) {
        std::cerr << "convergence order estimate: " << report.convergence->order_estimate << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Drifting Laplacian spectra, Lichnerowicz-type bounds and heat-flow energy decay"};
    app.require_subcommand(1);

    std::vector<std::pair<std::string, drift::RunReport (*)(const drift::ExperimentConfig&)>> commands = {
        {"mesh", drift::run_mesh_experiment},
        {"eigs", drift::run_spectrum_experiment},
        {"verify-thm1", drift::run_eigen_experiment},
        {"heat", drift::run_heat_experiment},
        {"converge", drift::run_convergence_experiment},
    };
    const std::map<std::string, std::string> descriptions = {
        {"mesh", "generate, validate or convert a mesh"},
        {"eigs", "smallest eigenpairs of the weighted operator"},
        {"verify-thm1", "first positive eigenvalue against the Lichnerowicz-type bound"},
        {"heat", "drifting heat flow and the L^p gradient-energy bounds"},
        {"converge", "first eigenvalue over several resolutions"},
    };
    std::vector<Subcommand> subs(commands.size());
    for (std::size_t i = 0; i < commands.size(); ++i) {
        subs[i].app = app.add_subcommand(commands[i].first, descriptions.at(commands[i].first));
        add_common_flags(subs[i]);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    for (std::size_t i = 0; i < commands.size(); ++i) {
        if (!subs[i].app->parsed()) continue;
        drift::ExperimentConfig cfg;
        try {
            cfg = resolve_config(subs[i]);
            cfg.check();
        } catch (const drift::Error& e) {
            std::cerr << "configuration error: " << e.what() << '\n';
            return kExitUsage;
        }

        const drift::RunReport report = commands[i].second(cfg);
        print_summary(report);
        try {
            if (cfg.out.empty()) {
                std::cout << drift::report_to_json(report).dump(2) << '\n';
            } else {
                for (const auto& path : drift::emit_report(report, cfg.out)) std::cerr << "wrote " << path << '\n';
            }
        } catch (const drift::Error& e) {
            std::cerr << "output error: " << e.what() << '\n';
            return kExitStageError;
        }
        if (report.error) return kExitStageError;
        if (report.verdict_failed()) return kExitVerdictFailed;
        return 0;
    }
    return kExitUsage;
}
