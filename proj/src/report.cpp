#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "drift/errors.hpp"
#include "drift/experiment.hpp"

namespace drift {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& text) {
    double value = 0.0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) throw ConfigError("bad number for " + key + ": '" + text + "'");
    return value;
}

long long parse_integer(const std::string& key, const std::string& text) {
    long long value = 0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) throw ConfigError("bad integer for " + key + ": '" + text + "'");
    return value;
}

int parse_int(const std::string& key, const std::string& text) {
    const long long v = parse_integer(key, text);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
        throw ConfigError("integer out of range for " + key);
    }
    return static_cast<int>(v);
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    throw ConfigError("bad flag for " + key + ": '" + text + "'");
}

template <class T, class F>
std::vector<T> parse_list(const std::string& text, F&& parse_one) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_one(item));
    }
    return out;
}

json diagnostics_json(const MeshDiagnostics& d) {
    return {
        {"is_closed", d.is_closed},
        {"is_oriented", d.is_oriented},
        {"euler_characteristic", d.euler_characteristic},
        {"min_triangle_area", d.min_triangle_area},
        {"min_angle", d.min_angle},
        {"boundary_edge_count", d.boundary_edge_count},
        {"nonmanifold_edge_count", d.nonmanifold_edge_count},
        {"edge_count", d.edge_count},
    };
}

json condition_json(const ConditionReport& r) {
    json j = {
        {"z", r.z},
        {"A", r.A},
        {"K", r.K},
        {"satisfiable", r.satisfiable},
        {"argmin_location", r.argmin_location},
        {"samples_used", r.samples_used},
    };
    if (r.bound) j["bound"] = *r.bound;
    return j;
}

json decay_json(const DecayVerdict& v) {
    return {
        {"p", v.p},
        {"pass", v.pass},
        {"worst_margin", v.worst_margin},
        {"worst_time", v.worst_time},
        {"tolerance", v.tolerance},
    };
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    out.close();
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

void apply_setting(ExperimentConfig& cfg, const std::string& raw_key, const std::string& raw_value) {
    std::string key = trim(raw_key);
    for (char& ch : key) {
        if (ch == '-') ch = '_';
    }
    const std::string value = trim(raw_value);
    auto d = [&] { return parse_double(key, value); };
    auto i = [&] { return parse_int(key, value); };

    if (key == "surface") cfg.surface = value;
    else if (key == "radius") cfg.radius = d();
    else if (key == "slope") cfg.slope = d();
    else if (key == "period_u") cfg.period_u = d();
    else if (key == "period_v") cfg.period_v = d();
    else if (key == "amplitude") cfg.amplitude = d();
    else if (key == "mesh_path") cfg.mesh_path = value;
    else if (key == "potential_path") cfg.potential_path = value;
    else if (key == "initial_path") cfg.initial_path = value;
    else if (key == "subdiv") cfg.subdiv = i();
    else if (key == "grid") cfg.grid = i();
    else if (key == "levels") cfg.levels = parse_list<int>(value, [&](const std::string& s) { return parse_int(key, s); });
    else if (key == "tol") cfg.tol = d();
    else if (key == "solver") cfg.solver = value;
    else if (key == "eig_count") cfg.eig_count = i();
    else if (key == "z_count") cfg.z_count = i();
    else if (key == "z_min") cfg.z_min = d();
    else if (key == "z_max") cfg.z_max = d();
    else if (key == "z_log") cfg.z_log = parse_bool(key, value);
    else if (key == "samples") cfg.samples = i();
    else if (key == "slack") cfg.slack = d();
    else if (key == "c") cfg.c = d();
    else if (key == "dt") cfg.dt = d();
    else if (key == "t_end") cfg.t_end = d();
    else if (key == "p_list") cfg.p_list = parse_list<double>(value, [&](const std::string& s) { return parse_double(key, s); });
    else if (key == "integrator") cfg.integrator = value;
    else if (key == "record_every") cfg.record_every = i();
    else if (key == "heat_tol") cfg.heat_tol = d();
    else if (key == "runs") cfg.runs = i();
    else if (key == "K") cfg.K = d();
    else if (key == "seed") {
        const long long s = parse_integer(key, value);
        if (s < 0) throw ConfigError("seed must be non-negative");
        cfg.seed = static_cast<std::uint64_t>(s);
    } else if (key == "out") cfg.out = value;
    else throw ConfigError("unknown config key '" + raw_key + "'");
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(line_no, "expected key = value");
        try {
            apply_setting(base, line.substr(0, eq), line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ParseError(line_no, e.what());
        }
    }
    return base;
}

ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    return parse_config(in, std::move(base));
}

json config_to_json(const ExperimentConfig& cfg) {
    json j = {
        {"surface", cfg.surface},
        {"radius", cfg.radius},
        {"slope", cfg.slope},
        {"period_u", cfg.period_u},
        {"period_v", cfg.period_v},
        {"amplitude", cfg.amplitude},
        {"mesh_path", cfg.mesh_path},
        {"potential_path", cfg.potential_path},
        {"initial_path", cfg.initial_path},
        {"subdiv", cfg.subdiv},
        {"grid", cfg.grid},
        {"levels", cfg.levels},
        {"tol", cfg.tol},
        {"solver", cfg.solver},
        {"eig_count", cfg.eig_count},
        {"z_count", cfg.z_count},
        {"z_min", cfg.z_min},
        {"z_max", cfg.z_max},
        {"z_log", cfg.z_log},
        {"samples", cfg.samples},
        {"slack", cfg.slack},
        {"c", cfg.c},
        {"dt", cfg.dt},
        {"t_end", cfg.t_end},
        {"p_list", cfg.p_list},
        {"integrator", cfg.integrator},
        {"record_every", cfg.record_every},
        {"heat_tol", cfg.heat_tol},
        {"runs", cfg.runs},
        {"seed", cfg.seed},
    };
    if (cfg.K) j["K"] = *cfg.K;
    return j;
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) j.at(key).get_to(field);
    };
    get("surface", cfg.surface);
    get("radius", cfg.radius);
    get("slope", cfg.slope);
    get("period_u", cfg.period_u);
    get("period_v", cfg.period_v);
    get("amplitude", cfg.amplitude);
    get("mesh_path", cfg.mesh_path);
    get("potential_path", cfg.potential_path);
    get("initial_path", cfg.initial_path);
    get("subdiv", cfg.subdiv);
    get("grid", cfg.grid);
    get("levels", cfg.levels);
    get("tol", cfg.tol);
    get("solver", cfg.solver);
    get("eig_count", cfg.eig_count);
    get("z_count", cfg.z_count);
    get("z_min", cfg.z_min);
    get("z_max", cfg.z_max);
    get("z_log", cfg.z_log);
    get("samples", cfg.samples);
    get("slack", cfg.slack);
    get("c", cfg.c);
    get("dt", cfg.dt);
    get("t_end", cfg.t_end);
    get("p_list", cfg.p_list);
    get("integrator", cfg.integrator);
    get("record_every", cfg.record_every);
    get("heat_tol", cfg.heat_tol);
    get("runs", cfg.runs);
    get("seed", cfg.seed);
    if (j.contains("K")) cfg.K = j.at("K").get<double>();
    return cfg;
}

const char* to_string(VerdictStatus status) {
    switch (status) {
        case VerdictStatus::Pass: return "pass";
        case VerdictStatus::Fail: return "fail";
        case VerdictStatus::NotApplicable: return "bound not applicable";
    }
    return "unknown";
}

bool RunReport::verdict_failed() const {
    return (theorem1 && theorem1->status == VerdictStatus::Fail) ||
           (theorem2 && theorem2->status == VerdictStatus::Fail);
}

json report_to_json(const RunReport& report) {
    json j;
    j["version"] = kVersion;
    j["command"] = report.command;
    j["config"] = config_to_json(report.config);
    j["status"] = report.error ? "error" : "completed";
    if (report.error) j["error"] = {{"stage", report.error->stage}, {"message", report.error->message}};

    if (report.mesh_diagnostics) {
        j["mesh"] = diagnostics_json(*report.mesh_diagnostics);
        j["mesh"]["vertex_count"] = report.vertex_count;
        j["mesh"]["triangle_count"] = report.triangle_count;
    }
    if (report.eigen) {
        const auto& e = *report.eigen;
        j["eigen"] = {
            {"eigenvalues", e.eigenvalues},
            {"residuals", e.residuals},
            {"tolerance", e.tolerance},
            {"solver", e.path},
            {"lambda1", e.lambda1},
            {"lambda1_residual", e.lambda1_residual},
        };
    }
    if (report.conditions) {
        const auto& c = *report.conditions;
        json reports = json::array();
        for (const auto& r : c.reports) reports.push_back(condition_json(r));
        j["conditions"] = {{"reports", reports}};
        if (c.best_z) j["conditions"]["best_z"] = *c.best_z;
        if (c.best_bound) j["conditions"]["best_bound"] = *c.best_bound;
    }
    if (report.theorem1) {
        const auto& t = *report.theorem1;
        j["theorem1"] = {
            {"verdict", to_string(t.status)},
            {"lambda1", t.lambda1},
            {"slack", t.slack},
        };
        if (t.best_bound) j["theorem1"]["best_bound"] = *t.best_bound;
        if (t.best_z) j["theorem1"]["best_z"] = *t.best_z;
        if (t.margin) j["theorem1"]["margin"] = *t.margin;
        if (!t.note.empty()) j["theorem1"]["note"] = t.note;
    }
    if (report.theorem2) {
        const auto& t = *report.theorem2;
        json runs = json::array();
        for (const auto& run : t.runs) {
            json verdicts = json::array();
            for (const auto& v : run.verdicts) verdicts.push_back(decay_json(v));
            runs.push_back({
                {"index", run.index},
                {"verdicts", verdicts},
                {"initial_energies", run.initial_energies},
                {"final_energies", run.final_energies},
            });
        }
        j["theorem2"] = {
            {"verdict", to_string(t.status)},
            {"K", t.K},
            {"K_source", t.K_source},
            {"c", t.c},
            {"tolerance", t.tolerance},
            {"runs", runs},
        };
    }
    if (report.convergence) {
        const auto& c = *report.convergence;
        json rows = json::array();
        for (const auto& r : c.rows) {
            json row = {{"resolution", r.resolution}, {"vertex_count", r.vertex_count}, {"lambda1", r.lambda1}};
            if (r.error) row["error"] = *r.error;
            if (r.ratio) row["ratio"] = *r.ratio;
            if (r.order) row["order"] = *r.order;
            rows.push_back(row);
        }
        j["convergence"] = {{"rows", rows}, {"reference", c.reference}, {"order_estimate", c.order_estimate}};
        if (c.reference_value) j["convergence"]["reference_value"] = *c.reference_value;
    }
    j["timings"] = report.timings;
    return j;
}

std::vector<std::string> emit_report(const RunReport& report, const std::string& directory) {
    namespace fs = std::filesystem;
    const fs::path dir(directory);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError("cannot create output directory " + directory +
                      (ec ? ": " + ec.message() : std::string()));
    }
    const fs::path report_path = dir / "report.json";
    if (fs::exists(report_path)) {
        throw IoError("output directory " + directory + " already holds a report.json");
    }

    std::vector<std::string> written;
    auto emit = [&](const char* name, const std::string& text) {
        write_text(dir / name, text);
        written.push_back((dir / name).string());
    };

    if (report.generated_mesh) {
        std::ostringstream ss;
        write_off(*report.generated_mesh, ss);
        emit("mesh.off", ss.str());
    }
    if (report.conditions) {
        std::ostringstream ss;
        write_sweep_csv(report.conditions->reports, ss);
        emit("sweep.csv", ss.str());
    }
    if (report.trace && report.theorem2) {
        std::ostringstream ss;
        write_trace_csv(*report.trace, report.theorem2->K, report.theorem2->c, ss);
        emit("trace.csv", ss.str());
    }
    if (report.eigenpairs) {
        std::ostringstream ss;
        write_eigen_csv(*report.eigenpairs, ss);
        emit("eigenpairs.csv", ss.str());
    }
    if (report.convergence) {
        std::ostringstream ss;
        write_convergence_csv(*report.convergence, ss);
        emit("convergence.csv", ss.str());
    }
    emit("report.json", report_to_json(report).dump(2) + "\n");
    return written;
}

}  // namespace drift
