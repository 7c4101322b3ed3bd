#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include <catch_amalgamated.hpp>

#include "drift/curvature.hpp"
#include "drift/errors.hpp"
#include "drift/random.hpp"
#include "drift/spectral.hpp"
#include "oracles.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using namespace drift;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

AnalyticSurface sphere(double slope, double radius = 1.0) {
    return AnalyticSurface(SphereLinear{radius, slope});
}

AnalyticSurface torus(double amplitude) {
    return AnalyticSurface(TorusCosine{kTwoPi, kTwoPi, amplitude});
}

// Closed forms written out independently of the library, n = 2, r = 1.
double sphere_condition(double a, double z, double s) {
    return (1.0 - a * s) - a * a * (1.0 - s * s) / (2.0 * z);
}

double torus_condition(double beta, double z, double u) {
    return std::min(-beta * std::cos(u), 0.0) - beta * beta * std::pow(std::sin(u), 2) / (2.0 * z);
}

std::vector<AnalyticSurface> catalog() {
    return {sphere(0.0), sphere(0.5), sphere(2.0), sphere(-1.3, 2.0), torus(1.0), torus(0.3),
            AnalyticSurface(TorusCosine{3.0, 1.0, -0.7})};
}

}  // namespace

TEST_CASE("condition A on the reference surfaces", "[curvature]") {
    for (double z : {1e-3, 0.3, 1.0, 50.0}) CHECK_THAT(condition2_A(sphere(0.0), z), WithinAbs(1.0, 1e-12));

    const GridMinimum m = condition2_scan(sphere(0.5), 1.0);
    CHECK_THAT(m.value, WithinAbs(0.5, 1e-12));
    CHECK_THAT(m.location, WithinAbs(1.0, 1e-12));

    const double a_torus = condition2_A(torus(1.0), 1.0);
    const double expected = oracle::minimize([](double u) { return torus_condition(1.0, 1.0, u); }, 0.0, kTwoPi);
    CHECK(a_torus < 0.0);
    CHECK_THAT(a_torus, WithinAbs(expected, 1e-6));
    CHECK_FALSE(condition_report(torus(1.0), 1.0).satisfiable);
}

TEST_CASE("condition A matches a continuous minimization", "[curvature]") {
    for (double a : {0.0, 0.25, 0.5, 0.75, 1.5, -2.0}) {
        for (double z : {1e-2, 0.2, 1.0, 7.0}) {
            CAPTURE(a, z);
            const double exact = oracle::minimize([&](double s) { return sphere_condition(a, z, s); }, -1.0, 1.0);
            CHECK_THAT(condition2_A(sphere(a), z), WithinAbs(exact, 1e-6));
        }
    }
    for (double beta : {0.2, 1.0, 3.0}) {
        for (double z : {0.05, 1.0, 20.0}) {
            CAPTURE(beta, z);
            const double exact = oracle::minimize([&](double u) { return torus_condition(beta, z, u); }, 0.0, kTwoPi);
            CHECK_THAT(condition2_A(torus(beta), z), WithinAbs(exact, 1e-6));
        }
    }
}

TEST_CASE("closed-form tensor on a non-unit sphere", "[curvature]") {
    // f = a x3 on the sphere of radius r: Ric = 1/r² g, Hess f = -(a x3 / r²) g
    // and x3 = r s, so the smallest eigenvalue is 1/r² - a s / r.
    const double r = 2.0, a = 0.8;
    const AnalyticSurface surface = sphere(a, r);
    for (double s : {-1.0, -0.3, 0.0, 0.6, 1.0}) {
        CHECK_THAT(surface.min_eig(s), WithinAbs(1.0 / (r * r) - a * s / r, 1e-15));
        CHECK_THAT(surface.grad_f_sq(s), WithinAbs(a * a * (1.0 - s * s), 1e-15));
    }
    CHECK_THAT(condition4_K(surface), WithinAbs(-(1.0 / (r * r) - a / r), 1e-12));
}

TEST_CASE("condition K on the reference surfaces", "[curvature]") {
    CHECK_THAT(condition4_K(sphere(0.0)), WithinAbs(-1.0, 1e-12));
    CHECK_THAT(condition4_K(sphere(0.5)), WithinAbs(-0.5, 1e-12));
    CHECK_THAT(condition4_K(torus(1.0)), WithinAbs(1.0, 1e-12));
    CHECK_THAT(condition4_K(torus(-1.0)), WithinAbs(1.0, 1e-6));
    CHECK_THAT(condition4_K(torus(0.0)), WithinAbs(0.0, 1e-15));
}

TEST_CASE("eigenvalue bound formula", "[curvature]") {
    CHECK_THAT(theorem1_bound(2, 1.0, 1.0), WithinAbs(4.0 / 3.0, 1e-15));
    CHECK_THAT(theorem1_bound(2, 1e-9, 1.0), WithinAbs(2.0, 1e-5));
    CHECK_THAT(theorem1_bound(3, 1.0, 2.0), WithinAbs(2.4, 1e-15));

    CHECK(classical_lichnerowicz(2, 1.0) == 2.0);
    CHECK(classical_lichnerowicz(3, 1.0) == 3.0);
    CHECK(std::abs(theorem1_bound(2, 1e-9, 1.0) - classical_lichnerowicz(2, 1.0)) < 1e-5);
    for (int n : {2, 3, 5}) {
        for (double k : {0.5, 1.0, 3.0}) {
            CHECK_THAT(theorem1_bound(n, 1e-9, (n - 1) * k), WithinAbs(classical_lichnerowicz(n, k), 1e-6));
        }
    }

    CHECK_THROWS_AS(theorem1_bound(2, 1.0, 0.0), BoundUnavailableError);
    CHECK_THROWS_AS(theorem1_bound(2, 1.0, -0.5), BoundUnavailableError);
    CHECK_THROWS_AS(theorem1_bound(2, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(classical_lichnerowicz(2, 0.0), DomainError);
    CHECK_THROWS_AS(condition2_A(sphere(0.5), 0.0), DomainError);
    CHECK_THROWS_AS(condition2_A(sphere(0.5), 1.0, 999), DomainError);
}

TEST_CASE("bound formula properties on random inputs", "[curvature][property]") {
    Rng rng(2024);
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform() * 6);
        const double z = std::exp(rng.uniform(-8.0, 6.0));
        const double dz = z * rng.uniform(0.01, 1.0);
        const double A = std::exp(rng.uniform(-5.0, 5.0));
        CAPTURE(n, z, A);
        const double b = theorem1_bound(n, z, A);
        CHECK(b > A);
        CHECK(theorem1_bound(n, z + dz, A) < b);
        CHECK_THAT(theorem1_bound(n, z, 3.0 * A), WithinRel(3.0 * b, 1e-14));
        const double nz1 = n * (z + 1.0);
        CHECK_THAT(b, WithinRel(nz1 * A / (nz1 - 1.0), 1e-14));
    }
}

TEST_CASE("grid scans are converged at the default sample count", "[curvature][property]") {
    for (const auto& surface : catalog()) {
        CAPTURE(surface.describe());
        CHECK(std::abs(condition4_K(surface, 2 * kDefaultSamples) - condition4_K(surface)) < 1e-6);
        for (double z : {1e-3, 0.1, 1.0, 10.0, 100.0}) {
            CAPTURE(z);
            CHECK(std::abs(condition2_A(surface, z, 2 * kDefaultSamples) - condition2_A(surface, z)) < 1e-6);
        }
    }
}

TEST_CASE("condition A never exceeds -K", "[curvature][property]") {
    for (const auto& surface : catalog()) {
        const double K = condition4_K(surface);
        double scanned = std::numeric_limits<double>::infinity();
        for (int i = 0; i < kDefaultSamples; ++i) {
            const double x = surface.parameter_min() +
                             (surface.parameter_max() - surface.parameter_min()) * i / kDefaultSamples;
            scanned = std::min(scanned, surface.min_eig(x));
        }
        CHECK(K >= -scanned - 1e-9);
        for (double z : make_z_grid(30, 1e-3, 1e3, true)) CHECK(condition2_A(surface, z) <= -K + 1e-15);
    }
}

TEST_CASE("condition reports are internally consistent", "[curvature]") {
    for (const auto& surface : catalog()) {
        for (double z : {0.01, 0.5, 4.0}) {
            const ConditionReport r = condition_report(surface, z);
            CHECK(r.samples_used >= kDefaultSamples);
            CHECK(r.satisfiable == (r.A > 0.0));
            CHECK(r.bound.has_value() == r.satisfiable);
            if (r.bound) CHECK(*r.bound == theorem1_bound(2, z, r.A));
            CHECK(r.argmin_location >= surface.parameter_min());
            CHECK(r.argmin_location <= surface.parameter_max());
        }
    }
}

TEST_CASE("bound optimization over z", "[curvature]") {
    SECTION("round sphere prefers the smallest z") {
        const BoundOptimum best = optimize_bound(sphere(0.0), {1e-6, 0.1, 1.0, 10.0});
        REQUIRE(best.best_z);
        CHECK(*best.best_z == 1e-6);
        CHECK_THAT(*best.best_bound, WithinAbs(2.0, 1e-5));
        CHECK(best.reports.size() == 4);
    }
    SECTION("tilted sphere bound sits below the discrete eigenvalue") {
        const AnalyticSurface surface = sphere(0.5);
        const BoundOptimum best = optimize_bound(surface, make_z_grid(50, 1e-3, 1e2, true));
        REQUIRE(best.best_bound);
        CHECK(*best.best_bound > 0.0);
        const TriangleMesh mesh = surface.make_mesh(4);
        const double lambda1 = first_positive_eigenvalue(assemble(mesh, surface.potential_on(mesh))).lambda1;
        CHECK(*best.best_bound <= lambda1);
    }
    SECTION("cosine torus is never satisfiable") {
        const BoundOptimum best = optimize_bound(torus(1.0), make_z_grid(20, 1e-3, 1e3, true));
        CHECK_FALSE(best.best_bound);
        CHECK_FALSE(best.best_z);
        for (const auto& r : best.reports) CHECK_FALSE(r.satisfiable);
    }
}

TEST_CASE("discrete first eigenvalue respects the bound on the sphere family", "[curvature][property]") {
    for (double a : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const AnalyticSurface surface = sphere(a);
        const TriangleMesh mesh = surface.make_mesh(4);
        const double lambda1 = first_positive_eigenvalue(assemble(mesh, surface.potential_on(mesh))).lambda1;
        for (double z : make_z_grid(25, 1e-3, 1e2, true)) {
            const ConditionReport r = condition_report(surface, z);
            if (!r.bound) continue;
            CAPTURE(a, z, lambda1, *r.bound);
            CHECK(lambda1 >= *r.bound * (1.0 - 0.02));
        }
    }
}

TEST_CASE("catalog meshes and potentials", "[curvature]") {
    const AnalyticSurface s = sphere(0.7, 1.5);
    const TriangleMesh mesh = s.make_mesh(2);
    CHECK(mesh.vertex_count() == 162);
    const Potential f = s.potential_on(mesh);
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        CHECK_THAT(mesh.positions()[v].norm(), WithinAbs(1.5, 1e-12));
        CHECK_THAT(f.values[v], WithinAbs(0.7 * mesh.positions()[v].z(), 1e-15));
    }
    CHECK(f.descriptor.has_value());

    const AnalyticSurface t(TorusCosine{3.0, 2.0, 0.4});
    const TriangleMesh grid = t.make_mesh(12);
    CHECK(grid.is_periodic());
    const auto& params = std::get<Periodic2D>(grid.geometry()).params;
    const Potential g = t.potential_on(grid);
    for (int v = 0; v < grid.vertex_count(); ++v) {
        CHECK_THAT(g.values[v], WithinAbs(0.4 * std::cos(kTwoPi * params[v].x() / 3.0), 1e-15));
    }
    CHECK(t.parameter_periodic());
    CHECK_FALSE(s.parameter_periodic());
    CHECK_THROWS_AS(t.potential_on(mesh), DimensionError);
    CHECK_THROWS_AS(AnalyticSurface(SphereLinear{0.0, 1.0}), DomainError);
    CHECK_THROWS_AS(AnalyticSurface(TorusCosine{1.0, -1.0, 0.0}), DomainError);
}

TEST_CASE("z grids and sweep CSV", "[curvature]") {
    const std::vector<double> grid = make_z_grid(50, 1e-3, 1e2, true);
    REQUIRE(grid.size() == 50);
    CHECK_THAT(grid.front(), WithinRel(1e-3, 1e-14));
    CHECK_THAT(grid.back(), WithinRel(1e2, 1e-14));
    for (std::size_t i = 2; i < grid.size(); ++i) {
        CHECK_THAT(grid[i] / grid[i - 1], WithinRel(grid[1] / grid[0], 1e-12));
    }
    const std::vector<double> linear = make_z_grid(5, 1.0, 3.0, false);
    CHECK(linear == std::vector<double>{1.0, 1.5, 2.0, 2.5, 3.0});
    CHECK_THROWS_AS(make_z_grid(5, 0.0, 1.0, true), DomainError);

    const BoundOptimum best = optimize_bound(sphere(0.75), {0.25, 1.0});
    std::ostringstream out;
    write_sweep_csv(best.reports, out);
    std::istringstream in(out.str());
    std::string header, unsat, sat;
    std::getline(in, header);
    std::getline(in, unsat);
    std::getline(in, sat);
    CHECK(header == "z,A,K,bound,satisfiable");
    CHECK(unsat.ends_with(",,0"));
    CHECK(sat.ends_with(",1"));
}
