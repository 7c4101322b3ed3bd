#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "drift/mesh.hpp"
#include "drift/weighted_operator.hpp"

namespace drift {

/// f = slope * x3 restricted to the round sphere of the given radius.
struct SphereLinear {
    double radius = 1.0;
    double slope = 0.0;
};

/// f(u, v) = amplitude * cos(2πu / period_u) on the flat torus.
struct TorusCosine {
    double period_u = 1.0;
    double period_v = 1.0;
    double amplitude = 0.0;
};

/// Analytic test surface with closed-form Bakry-Emery tensor Ric + D²f.
///
/// Each catalog entry reduces to a one-parameter family: the sphere's
/// tensor depends only on s = x3 / r ∈ [-1, 1], the torus's only on
/// u ∈ [0, period_u).
class AnalyticSurface {
public:
    using Kind = std::variant<SphereLinear, TorusCosine>;

    explicit AnalyticSurface(Kind kind);

    const Kind& kind() const noexcept { return kind_; }
    int dimension() const noexcept { return 2; }
    std::string describe() const;

    /// Bounds of the reduced parameter.
    double parameter_min() const;
    double parameter_max() const;
    /// Whether parameter_max() is identified with parameter_min().
    bool parameter_periodic() const;

    /// Smallest eigenvalue of Ric + D²f at reduced parameter x.
    double min_eig(double x) const;
    /// |∇f|² at reduced parameter x.
    double grad_f_sq(double x) const;

    /// Mesh that discretizes this surface. `resolution` is the icosphere
    /// subdivision level or the torus cells per direction.
    TriangleMesh make_mesh(int resolution) const;
    /// f sampled at the mesh vertices.
    Potential potential_on(const TriangleMesh& mesh) const;

private:
    Kind kind_;
};

struct ConditionReport {
    double z = 0.0;
    double A = 0.0;
    double K = 0.0;
    std::optional<double> bound;
    bool satisfiable = false;
    double argmin_location = 0.0;
    int samples_used = 0;
};

inline constexpr int kDefaultSamples = 10000;
inline constexpr int kMinSamples = 1000;

struct GridMinimum {
    double value = 0.0;
    double location = 0.0;
};

/// Largest A with Ric + D²f >= |∇f|²/(n z) + A on the sample grid.
GridMinimum condition2_scan(const AnalyticSurface& surface, double z, int samples = kDefaultSamples);
double condition2_A(const AnalyticSurface& surface, double z, int samples = kDefaultSamples);

/// Tight K with Ric + D²f >= -K on the sample grid; negative K means decay.
double condition4_K(const AnalyticSurface& surface, int samples = kDefaultSamples);

/// n(z+1)A / (n(z+1) - 1); throws BoundUnavailableError for A <= 0.
double theorem1_bound(int n, double z, double A);

/// n k
double classical_lichnerowicz(int n, double k);

ConditionReport condition_report(const AnalyticSurface& surface, double z,
                                 int samples = kDefaultSamples);

struct BoundOptimum {
    std::optional<double> best_z;
    std::optional<double> best_bound;
    std::vector<ConditionReport> reports;
};

BoundOptimum optimize_bound(const AnalyticSurface& surface, const std::vector<double>& z_grid,
                            int samples = kDefaultSamples);

/// `count` points from lo to hi inclusive, log- or linearly spaced.
std::vector<double> make_z_grid(int count, double lo, double hi, bool logarithmic);

/// CSV with columns z, A, K, bound, satisfiable.
void write_sweep_csv(const std::vector<ConditionReport>& reports, std::ostream& out);

}  // namespace drift
