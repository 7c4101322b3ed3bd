#include "drift/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "drift/errors.hpp"

namespace drift {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_samples(int samples) {
    if (samples < kMinSamples) {
        throw DomainError("curvature scans need at least " + std::to_string(kMinSamples) +
                          " samples, got " + std::to_string(samples));
    }
}

// Uniform grid over the surface's reduced parameter, then golden-section
// polish within one step of the best sample. Closed intervals include both
// ends; periodic ones stop one step short of the period.
template <class F>
GridMinimum scan(const AnalyticSurface& surface, int samples, F&& value_at) {
    const double lo = surface.parameter_min();
    const double hi = surface.parameter_max();
    const bool periodic = surface.parameter_periodic();
    const double step = (hi - lo) / (periodic ? samples : samples - 1);
    GridMinimum best{std::numeric_limits<double>::infinity(), lo};
    for (int i = 0; i < samples; ++i) {
        const double x = (!periodic && i == samples - 1) ? hi : lo + step * i;
        const double v = value_at(x);
        if (v < best.value) best = {v, x};
    }

    double a = best.location - step;
    double b = best.location + step;
    if (!periodic) {
        a = std::max(a, lo);
        b = std::min(b, hi);
    }
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - ratio * (b - a);
    double d = a + ratio * (b - a);
    double fc = value_at(c);
    double fd = value_at(d);
    for (int it = 0; it < 80; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = value_at(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = value_at(d);
        }
    }
    const double x = fc < fd ? c : d;
    if (const double v = std::min(fc, fd); v < best.value) {
        best = {v, periodic ? lo + std::fmod(std::fmod(x - lo, hi - lo) + (hi - lo), hi - lo) : x};
    }
    return best;
}

}  // namespace

AnalyticSurface::AnalyticSurface(Kind kind) : kind_(kind) {
    std::visit(Overloaded{
                   [](const SphereLinear& s) {
                       if (!(s.radius > 0.0)) throw DomainError("sphere radius must be positive");
                       if (!std::isfinite(s.slope)) throw DomainError("sphere slope must be finite");
                   },
                   [](const TorusCosine& t) {
                       if (!(t.period_u > 0.0) || !(t.period_v > 0.0)) {
                           throw DomainError("torus periods must be positive");
                       }
                       if (!std::isfinite(t.amplitude)) throw DomainError("torus amplitude must be finite");
                   },
               },
               kind_);
}

std::string AnalyticSurface::describe() const {
    std::ostringstream ss;
    ss << std::setprecision(17);
    std::visit(Overloaded{
                   [&](const SphereLinear& s) {
                       ss << "SphereLinear(radius=" << s.radius << ", slope=" << s.slope << ")";
                   },
                   [&](const TorusCosine& t) {
                       ss << "TorusCosine(period_u=" << t.period_u << ", period_v=" << t.period_v
                          << ", amplitude=" << t.amplitude << ")";
                   },
               },
               kind_);
    return ss.str();
}

double AnalyticSurface::parameter_min() const {
    return std::holds_alternative<SphereLinear>(kind_) ? -1.0 : 0.0;
}

double AnalyticSurface::parameter_max() const {
    return std::visit(Overloaded{
                          [](const SphereLinear&) { return 1.0; },
                          [](const TorusCosine& t) { return t.period_u; },
                      },
                      kind_);
}

bool AnalyticSurface::parameter_periodic() const {
    return std::holds_alternative<TorusCosine>(kind_);
}

// Sphere of radius r: Ric = (n-1)/r² g. A linear function ℓ restricted to
// the sphere has Hess ℓ = -(ℓ/r²) g, and with ℓ = a x3 = a r s this is
// -(a s / r) g. Both are multiples of g, so the smallest eigenvalue is
// (n-1)/r² - a s / r. The tangential gradient of a x3 has squared norm
// a² (1 - s²).
//
// Flat torus: Ric = 0 and the Hessian in the flat chart is
// diag(-β k² cos(k u), 0) with k = 2π/L_u, so the smallest eigenvalue is
// min(-β k² cos(k u), 0) and |∇f|² = β² k² sin²(k u).
double AnalyticSurface::min_eig(double x) const {
    const int n = dimension();
    return std::visit(Overloaded{
                          [&](const SphereLinear& s) {
                              return (n - 1) / (s.radius * s.radius) - s.slope * x / s.radius;
                          },
                          [&](const TorusCosine& t) {
                              const double k = kTwoPi / t.period_u;
                              return std::min(-t.amplitude * k * k * std::cos(k * x), 0.0);
                          },
                      },
                      kind_);
}

double AnalyticSurface::grad_f_sq(double x) const {
    return std::visit(Overloaded{
                          [&](const SphereLinear& s) { return s.slope * s.slope * (1.0 - x * x); },
                          [&](const TorusCosine& t) {
                              const double k = kTwoPi / t.period_u;
                              const double d = t.amplitude * k * std::sin(k * x);
                              return d * d;
                          },
                      },
                      kind_);
}

TriangleMesh AnalyticSurface::make_mesh(int resolution) const {
    return std::visit(Overloaded{
                          [&](const SphereLinear& s) { return generate_icosphere(resolution, s.radius); },
                          [&](const TorusCosine& t) {
                              return generate_flat_torus(resolution, resolution, t.period_u, t.period_v);
                          },
                      },
                      kind_);
}

Potential AnalyticSurface::potential_on(const TriangleMesh& mesh) const {
    Potential f;
    f.descriptor = describe();
    f.values.resize(mesh.vertex_count());
    std::visit(Overloaded{
                   [&](const SphereLinear& s) {
                       const auto& pos = mesh.positions();
                       for (int i = 0; i < mesh.vertex_count(); ++i) f.values[i] = s.slope * pos[i].z();
                   },
                   [&](const TorusCosine& t) {
                       const auto* periodic = std::get_if<Periodic2D>(&mesh.geometry());
                       if (!periodic) throw DimensionError("TorusCosine needs a periodic mesh");
                       const double k = kTwoPi / t.period_u;
                       for (int i = 0; i < mesh.vertex_count(); ++i) {
                           f.values[i] = t.amplitude * std::cos(k * periodic->params[i].x());
                       }
                   },
               },
               kind_);
    return f;
}

GridMinimum condition2_scan(const AnalyticSurface& surface, double z, int samples) {
    if (!(z > 0.0)) throw DomainError("curvature condition needs z > 0");
    require_samples(samples);
    const double nz = surface.dimension() * z;
    return scan(surface, samples,
                [&](double x) { return surface.min_eig(x) - surface.grad_f_sq(x) / nz; });
}

double condition2_A(const AnalyticSurface& surface, double z, int samples) {
    return condition2_scan(surface, z, samples).value;
}

double condition4_K(const AnalyticSurface& surface, int samples) {
    require_samples(samples);
    return -scan(surface, samples, [&](double x) { return surface.min_eig(x); }).value;
}

double theorem1_bound(int n, double z, double A) {
    if (!(A > 0.0)) throw BoundUnavailableError("Lichnerowicz-type bound needs A > 0");
    if (!(z > 0.0)) throw DomainError("Lichnerowicz-type bound needs z > 0");
    const double nz1 = n * (z + 1.0);
    if (n < 1 || !(nz1 > 1.0)) throw DomainError("Lichnerowicz-type bound needs n(z+1) > 1");
    return nz1 * A / (nz1 - 1.0);
}

double classical_lichnerowicz(int n, double k) {
    if (n < 2) throw DomainError("dimension must be at least 2");
    if (!(k > 0.0)) throw DomainError("curvature constant k must be positive");
    return n * k;
}

ConditionReport condition_report(const AnalyticSurface& surface, double z, int samples) {
    const GridMinimum a = condition2_scan(surface, z, samples);
    ConditionReport report;
    report.z = z;
    report.A = a.value;
    report.argmin_location = a.location;
    report.K = condition4_K(surface, samples);
    report.samples_used = samples;
    report.satisfiable = a.value > 0.0;
    if (report.satisfiable) report.bound = theorem1_bound(surface.dimension(), z, a.value);
    return report;
}

BoundOptimum optimize_bound(const AnalyticSurface& surface, const std::vector<double>& z_grid,
                            int samples) {
    if (z_grid.empty()) throw DomainError("z grid is empty");
    BoundOptimum out;
    for (double z : z_grid) {
        ConditionReport r = condition_report(surface, z, samples);
        if (r.bound && (!out.best_bound || *r.bound > *out.best_bound)) {
            out.best_bound = r.bound;
            out.best_z = z;
        }
        out.reports.push_back(r);
    }
    return out;
}

std::vector<double> make_z_grid(int count, double lo, double hi, bool logarithmic) {
    if (count < 1) throw DomainError("z grid needs at least one point");
    if (!(lo > 0.0) || !(hi >= lo)) throw DomainError("z grid needs 0 < z_min <= z_max");
    std::vector<double> grid(count);
    for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        grid[i] = logarithmic ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)))
                              : lo + t * (hi - lo);
    }
    grid.back() = count == 1 ? lo : hi;
    return grid;
}

void write_sweep_csv(const std::vector<ConditionReport>& reports, std::ostream& out) {
    out << "z,A,K,bound,satisfiable\n" << std::setprecision(17);
    for (const auto& r : reports) {
        out << r.z << ',' << r.A << ',' << r.K << ',';
        if (r.bound) out << *r.bound;
        out << ',' << (r.satisfiable ? 1 : 0) << '\n';
    }
}

}  // namespace drift
