#include "drift/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <set>
#include <string>

#include "drift/errors.hpp"

namespace drift {

namespace {

// Runs one named pipeline stage, recording its wall time and turning any
// library error into a StageError on the report.
class StageRunner {
public:
    explicit StageRunner(RunReport& report) : report_(report) {}

    template <class F>
    bool run(const std::string& stage, F&& body) {
        if (report_.error) return false;
        const auto start = std::chrono::steady_clock::now();
        try {
            body();
        } catch (const std::exception& e) {
            report_.error = StageError{stage, e.what()};
        }
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        report_.timings[stage] = elapsed.count();
        return !report_.error;
    }

private:
    RunReport& report_;
};

struct Discretization {
    std::optional<TriangleMesh> mesh;
    std::optional<Potential> potential;
    std::optional<WeightedOperator> op;
};

bool build_mesh(const ExperimentConfig& cfg, RunReport& report, StageRunner& stages,
                Discretization& d, int resolution) {
    return stages.run("mesh", [&] {
        cfg.check();
        if (cfg.is_catalog()) {
            d.mesh = cfg.analytic_surface().make_mesh(resolution);
            report.generated_mesh = d.mesh;
        } else {
            d.mesh = load_off_file(cfg.mesh_path);
        }
        report.mesh_diagnostics = validate(*d.mesh);
        report.vertex_count = d.mesh->vertex_count();
        report.triangle_count = d.mesh->triangle_count();
    });
}

bool build_operator(const ExperimentConfig& cfg, StageRunner& stages, Discretization& d) {
    const bool have_potential = stages.run("potential", [&] {
        if (cfg.is_catalog()) {
            d.potential = cfg.analytic_surface().potential_on(*d.mesh);
        } else if (cfg.potential_path.empty()) {
            d.potential = Potential::zero(d.mesh->vertex_count());
        } else {
            d.potential = Potential{read_field_csv_file(cfg.potential_path), cfg.potential_path};
        }
    });
    return have_potential && stages.run("assemble", [&] { d.op = assemble(*d.mesh, *d.potential); });
}

// Exact λ1 of the continuum problem when one is known in closed form
// (f ≡ 0 on the round sphere or the flat torus).
std::optional<double> analytic_lambda1(const ExperimentConfig& cfg) {
    if (cfg.surface == "sphere-linear" && cfg.slope == 0.0) return 2.0 / (cfg.radius * cfg.radius);
    if (cfg.surface == "torus-cosine" && cfg.amplitude == 0.0) {
        const double k = 2.0 * std::numbers::pi / std::max(cfg.period_u, cfg.period_v);
        return k * k;
    }
    return std::nullopt;
}

}  // namespace

AnalyticSurface ExperimentConfig::analytic_surface() const {
    if (surface == "sphere-linear") return AnalyticSurface(SphereLinear{radius, slope});
    if (surface == "torus-cosine") return AnalyticSurface(TorusCosine{period_u, period_v, amplitude});
    throw ConfigError("surface '" + surface + "' is not a catalog surface");
}

int ExperimentConfig::resolution() const {
    return surface == "torus-cosine" ? grid : subdiv;
}

HeatConfig ExperimentConfig::heat_config() const {
    HeatConfig h;
    h.c = c;
    h.dt = dt;
    h.t_end = t_end;
    h.p_list = p_list;
    h.record_every = record_every;
    if (integrator == "implicit-euler") {
        h.integrator = Integrator::ImplicitEuler;
    } else if (integrator == "spectral") {
        h.integrator = Integrator::SpectralExpansion;
    } else {
        throw ConfigError("unknown integrator '" + integrator + "' (implicit-euler | spectral)");
    }
    return h;
}

SolverPath ExperimentConfig::solver_path() const {
    if (solver == "auto") return SolverPath::Auto;
    if (solver == "dense") return SolverPath::Dense;
    if (solver == "iterative") return SolverPath::Iterative;
    throw ConfigError("unknown solver '" + solver + "' (auto | dense | iterative)");
}

std::vector<double> ExperimentConfig::z_grid() const {
    try {
        return make_z_grid(z_count, z_min, z_max, z_log);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

void ExperimentConfig::check() const {
    if (surface == "off") {
        if (mesh_path.empty()) throw ConfigError("surface=off needs mesh_path");
    } else if (surface != "sphere-linear" && surface != "torus-cosine") {
        throw ConfigError("unknown surface '" + surface + "' (sphere-linear | torus-cosine | off)");
    }
    if (!(tol >= 1e-12 && tol <= 1e-2)) throw ConfigError("tol must lie in [1e-12, 1e-2]");
    if (eig_count < 2) throw ConfigError("eig_count must be at least 2");
    if (samples < kMinSamples) throw ConfigError("samples must be at least 1000");
    if (!(slack >= 0.0 && slack < 1.0)) throw ConfigError("slack must lie in [0, 1)");
    if (!(heat_tol >= 0.0)) throw ConfigError("heat_tol must be non-negative");
    if (runs < 1) throw ConfigError("runs must be at least 1");
    solver_path();
    try {
        heat_config().check();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    z_grid();
}

Eigen::VectorXd random_mean_zero(const WeightedOperator& op, Rng& rng) {
    return remove_weighted_mean(op, rng.uniform_vector(op.size(), -1.0, 1.0));
}

RunReport run_mesh_experiment(const ExperimentConfig& cfg) {
    RunReport report;
    report.command = "mesh";
    report.config = cfg;
    StageRunner stages(report);
    Discretization d;
    build_mesh(cfg, report, stages, d, cfg.resolution());
    // Loaded meshes are echoed back so `mesh` also converts/normalizes OFF.
    if (d.mesh && !report.generated_mesh) report.generated_mesh = d.mesh;
    return report;
}

RunReport run_spectrum_experiment(const ExperimentConfig& cfg) {
    RunReport report;
    report.command = "eigs";
    report.config = cfg;
    StageRunner stages(report);
    Discretization d;
    if (!build_mesh(cfg, report, stages, d, cfg.resolution()) || !build_operator(cfg, stages, d)) {
        return report;
    }
    stages.run("eigen", [&] {
        const int k = std::min(cfg.eig_count, d.op->size());
        EigenResult eig = smallest_eigenpairs(*d.op, k, cfg.tol, cfg.solver_path());
        const FirstEigenpair first = first_positive_eigenvalue(*d.op, cfg.tol, cfg.solver_path());
        report.eigen = EigenSummary{eig.eigenvalues, eig.residuals,     cfg.tol,
                                    to_string(eig.path_used), first.lambda1, first.residual};
        report.eigenpairs = std::move(eig);
    });
    return report;
}

RunReport run_eigen_experiment(const ExperimentConfig& cfg) {
    RunReport report = run_spectrum_experiment(cfg);
    report.command = "verify-thm1";
    report.eigenpairs.reset();
    if (report.error) return report;

    StageRunner stages(report);
    if (cfg.is_catalog()) {
        stages.run("conditions", [&] {
            report.conditions = optimize_bound(cfg.analytic_surface(), cfg.z_grid(), cfg.samples);
        });
    }
    stages.run("verdict", [&] {
        Theorem1Verdict v;
        v.lambda1 = report.eigen->lambda1;
        v.slack = cfg.slack;
        if (!report.conditions) {
            v.status = VerdictStatus::NotApplicable;
            v.note = "no analytic curvature for this surface";
        } else if (!report.conditions->best_bound) {
            v.status = VerdictStatus::NotApplicable;
            v.note = "no A > 0 on the z grid";
        } else {
            v.best_bound = report.conditions->best_bound;
            v.best_z = report.conditions->best_z;
            const double threshold = *v.best_bound * (1.0 - cfg.slack);
            v.margin = v.lambda1 - threshold;
            v.status = v.lambda1 >= threshold ? VerdictStatus::Pass : VerdictStatus::Fail;
        }
        report.theorem1 = v;
    });
    return report;
}

RunReport run_heat_experiment(const ExperimentConfig& cfg) {
    RunReport report;
    report.command = "heat";
    report.config = cfg;
    StageRunner stages(report);
    Discretization d;
    if (!build_mesh(cfg, report, stages, d, cfg.resolution()) || !build_operator(cfg, stages, d)) {
        return report;
    }

    Theorem2Summary summary;
    summary.c = cfg.c;
    summary.tolerance = cfg.heat_tol;
    const bool have_k = stages.run("conditions", [&] {
        if (cfg.K) {
            summary.K = *cfg.K;
            summary.K_source = "config";
        } else if (cfg.is_catalog()) {
            summary.K = condition4_K(cfg.analytic_surface(), cfg.samples);
            summary.K_source = "condition4_K grid scan";
        } else {
            throw ConfigError("K is unavailable for OFF meshes; set K explicitly");
        }
    });
    if (!have_k) return report;

    stages.run("heat", [&] {
        const HeatConfig heat = cfg.heat_config();
        std::optional<EigenResult> basis;
        if (heat.integrator == Integrator::SpectralExpansion) {
            basis = smallest_eigenpairs(*d.op, d.op->size(), cfg.tol, SolverPath::Dense);
        }
        Rng rng(cfg.seed);
        bool all_pass = true;
        const int runs = cfg.initial_path.empty() ? cfg.runs : 1;
        for (int r = 0; r < runs; ++r) {
            Eigen::VectorXd u0;
            if (cfg.initial_path.empty()) {
                u0 = random_mean_zero(*d.op, rng);
            } else {
                u0 = read_field_csv_file(cfg.initial_path);
                if (u0.size() != d.op->size()) throw DimensionError("initial data length mismatch");
            }
            EnergyTrace trace = evolve(*d.op, u0, heat, basis ? &*basis : nullptr);
            HeatRun run;
            run.index = static_cast<std::uint64_t>(r);
            run.verdicts = verify_decay(trace, summary.K, cfg.c, cfg.heat_tol);
            for (const auto& e : trace.energies) {
                run.initial_energies.push_back(e.front());
                run.final_energies.push_back(e.back());
            }
            for (const auto& v : run.verdicts) all_pass = all_pass && v.pass;
            summary.runs.push_back(std::move(run));
            if (r == 0) report.trace = std::move(trace);
        }
        summary.status = all_pass ? VerdictStatus::Pass : VerdictStatus::Fail;
    });
    report.theorem2 = std::move(summary);
    return report;
}

ConvergenceTable convergence_study(const ExperimentConfig& cfg, const std::vector<int>& levels) {
    if (levels.size() < 3) throw ConfigError("convergence study needs at least three levels");
    if (std::set<int>(levels.begin(), levels.end()).size() != levels.size()) {
        throw ConfigError("convergence study got duplicate resolutions");
    }
    if (!cfg.is_catalog()) throw ConfigError("convergence study needs a catalog surface");
    std::vector<int> sorted = levels;
    std::sort(sorted.begin(), sorted.end());

    const AnalyticSurface surface = cfg.analytic_surface();
    const bool sphere = cfg.surface == "sphere-linear";
    // Mesh size relative to the coarsest level.
    auto mesh_size = [&](int level) {
        return sphere ? std::ldexp(1.0, -level) : 1.0 / level;
    };

    ConvergenceTable table;
    for (int level : sorted) {
        const TriangleMesh mesh = surface.make_mesh(level);
        const WeightedOperator op = assemble(mesh, surface.potential_on(mesh));
        const FirstEigenpair first = first_positive_eigenvalue(op, cfg.tol, cfg.solver_path());
        table.rows.push_back({level, mesh.vertex_count(), first.lambda1, {}, {}, {}});
    }

    const std::size_t n = table.rows.size();
    if (const auto exact = analytic_lambda1(cfg)) {
        table.reference = "analytic";
        table.reference_value = exact;
        for (auto& row : table.rows) row.error = std::abs(row.lambda1 - *exact);
    } else {
        table.reference = "finest";
        table.reference_value = table.rows.back().lambda1;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            table.rows[i].error = std::abs(table.rows[i].lambda1 - table.rows.back().lambda1);
        }
    }
    for (std::size_t i = 1; i < n; ++i) {
        const auto& prev = table.rows[i - 1];
        auto& row = table.rows[i];
        if (prev.error && row.error && *row.error > 0.0) {
            row.ratio = *prev.error / *row.error;
            row.order = std::log(*row.ratio) /
                        std::log(mesh_size(prev.resolution) / mesh_size(row.resolution));
        }
    }

    if (table.reference == "analytic") {
        table.order_estimate = table.rows.back().order.value_or(0.0);
    } else {
        // Richardson: for λ(h) = λ* + C h^p on levels with a constant
        // refinement ratio, p = log(|λ_a - λ_b| / |λ_b - λ_c|) / log(ratio).
        const auto& a = table.rows[n - 3];
        const auto& b = table.rows[n - 2];
        const auto& c = table.rows[n - 1];
        const double ratio = mesh_size(b.resolution) / mesh_size(c.resolution);
        table.order_estimate = std::log(std::abs(a.lambda1 - b.lambda1) / std::abs(b.lambda1 - c.lambda1)) /
                               std::log(ratio);
    }
    return table;
}

void write_convergence_csv(const ConvergenceTable& table, std::ostream& out) {
    out << "resolution,vertex_count,lambda1,error,ratio,order\n" << std::setprecision(17);
    for (const auto& r : table.rows) {
        out << r.resolution << ',' << r.vertex_count << ',' << r.lambda1 << ',';
        if (r.error) out << *r.error;
        out << ',';
        if (r.ratio) out << *r.ratio;
        out << ',';
        if (r.order) out << *r.order;
        out << '\n';
    }
}

RunReport run_convergence_experiment(const ExperimentConfig& cfg) {
    RunReport report;
    report.command = "converge";
    report.config = cfg;
    StageRunner stages(report);
    stages.run("convergence", [&] {
        cfg.check();
        report.convergence = convergence_study(cfg, cfg.levels);
    });
    return report;
}

}  // namespace drift
