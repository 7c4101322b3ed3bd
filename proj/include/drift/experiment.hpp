#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "drift/curvature.hpp"
#include "drift/heatflow.hpp"
#include "drift/mesh.hpp"
#include "drift/random.hpp"
#include "drift/spectral.hpp"

namespace drift {

inline constexpr const char* kVersion = "0.3.0";

/// Flat experiment description. Every field maps to one key of the
/// key=value config format and one --flag of the CLI (underscores become
/// dashes).
struct ExperimentConfig {
    /// sphere-linear | torus-cosine | off
    std::string surface = "sphere-linear";
    double radius = 1.0;
    double slope = 0.0;
    double period_u = 6.283185307179586;
    double period_v = 6.283185307179586;
    double amplitude = 0.0;
    std::string mesh_path;
    std::string potential_path;
    std::string initial_path;

    int subdiv = 4;
    int grid = 64;
    std::vector<int> levels;

    double tol = kDefaultEigenTolerance;
    std::string solver = "auto";
    int eig_count = 6;

    int z_count = 50;
    double z_min = 1e-3;
    double z_max = 1e2;
    bool z_log = true;
    int samples = kDefaultSamples;
    double slack = 0.02;

    double c = 0.0;
    double dt = 1e-3;
    double t_end = 2.0;
    std::vector<double> p_list{1.0, 2.0, 3.0, 4.0};
    std::string integrator = "implicit-euler";
    int record_every = 10;
    double heat_tol = 0.05;
    int runs = 1;
    /// Overrides condition4_K; required for OFF meshes.
    std::optional<double> K;

    std::uint64_t seed = 1;
    std::string out;

    bool is_catalog() const noexcept { return surface != "off"; }
    AnalyticSurface analytic_surface() const;
    /// Subdivision level for spheres, grid size for tori.
    int resolution() const;
    HeatConfig heat_config() const;
    SolverPath solver_path() const;
    std::vector<double> z_grid() const;

    /// Throws ConfigError when the description cannot be resolved.
    void check() const;
};

/// Sets one field from its key=value spelling. Throws ConfigError for
/// unknown keys or malformed values.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Parses `key = value` lines; '#' starts a comment.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {});
ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base = {});

nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);

struct StageError {
    std::string stage;
    std::string message;
};

struct EigenSummary {
    std::vector<double> eigenvalues;
    std::vector<double> residuals;
    double tolerance = 0.0;
    std::string path;
    double lambda1 = 0.0;
    double lambda1_residual = 0.0;
};

enum class VerdictStatus { Pass, Fail, NotApplicable };
const char* to_string(VerdictStatus status);

struct Theorem1Verdict {
    VerdictStatus status = VerdictStatus::NotApplicable;
    double lambda1 = 0.0;
    std::optional<double> best_bound;
    std::optional<double> best_z;
    double slack = 0.0;
    /// lambda1 - best_bound (1 - slack), when a bound exists.
    std::optional<double> margin;
    std::string note;
};

struct HeatRun {
    std::uint64_t index = 0;
    std::vector<DecayVerdict> verdicts;
    std::vector<double> initial_energies;
    std::vector<double> final_energies;
};

struct Theorem2Summary {
    double K = 0.0;
    std::string K_source;
    double c = 0.0;
    double tolerance = 0.0;
    VerdictStatus status = VerdictStatus::NotApplicable;
    std::vector<HeatRun> runs;
};

struct ConvergenceRow {
    int resolution = 0;
    int vertex_count = 0;
    double lambda1 = 0.0;
    std::optional<double> error;
    /// error(previous level) / error(this level)
    std::optional<double> ratio;
    /// log2(ratio) / log2(h_prev / h)
    std::optional<double> order;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    /// "analytic" or "finest"
    std::string reference;
    std::optional<double> reference_value;
    double order_estimate = 0.0;
};

struct RunReport {
    std::string command;
    ExperimentConfig config;
    std::optional<MeshDiagnostics> mesh_diagnostics;
    int vertex_count = 0;
    int triangle_count = 0;
    std::optional<EigenSummary> eigen;
    std::optional<BoundOptimum> conditions;
    std::optional<Theorem1Verdict> theorem1;
    std::optional<Theorem2Summary> theorem2;
    std::optional<ConvergenceTable> convergence;
    std::optional<StageError> error;
    std::map<std::string, double> timings;

    // Artifacts written next to report.json.
    std::optional<TriangleMesh> generated_mesh;
    std::optional<EnergyTrace> trace;
    std::optional<EigenResult> eigenpairs;

    /// Whether any verdict failed.
    bool verdict_failed() const;
};

nlohmann::json report_to_json(const RunReport& report);

/// Generates or loads the mesh and reports its diagnostics.
RunReport run_mesh_experiment(const ExperimentConfig& cfg);
/// Spectrum only.
RunReport run_spectrum_experiment(const ExperimentConfig& cfg);
/// λ1 against the best Lichnerowicz-type bound over the z grid.
RunReport run_eigen_experiment(const ExperimentConfig& cfg);
/// Drifting heat flow from seeded random data and the L^p decay check.
RunReport run_heat_experiment(const ExperimentConfig& cfg);
RunReport run_convergence_experiment(const ExperimentConfig& cfg);

/// λ1 at each resolution and the observed convergence order. Throws
/// ConfigError for fewer than three or repeated levels.
ConvergenceTable convergence_study(const ExperimentConfig& cfg, const std::vector<int>& levels);
void write_convergence_csv(const ConvergenceTable& table, std::ostream& out);

/// Writes report.json plus trace.csv, sweep.csv, eigenpairs.csv,
/// convergence.csv and mesh.off as applicable. Refuses to overwrite an
/// existing report.json. Returns the written paths.
std::vector<std::string> emit_report(const RunReport& report, const std::string& directory);

/// Seeded mean-zero initial data, uniform per vertex before projection.
Eigen::VectorXd random_mean_zero(const WeightedOperator& op, Rng& rng);

}  // namespace drift
