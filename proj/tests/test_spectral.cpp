#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include <Eigen/Dense>
#include <catch_amalgamated.hpp>

#include "drift/errors.hpp"
#include "drift/random.hpp"
#include "drift/spectral.hpp"
#include "oracles.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using namespace drift;

namespace {

WeightedOperator sphere_operator(int subdiv, double slope, double shift = 0.0) {
    const TriangleMesh mesh = generate_icosphere(subdiv, 1.0);
    Eigen::VectorXd f(mesh.vertex_count());
    for (int v = 0; v < mesh.vertex_count(); ++v) f[v] = slope * mesh.positions()[v].z() + shift;
    return assemble(mesh, {f, std::nullopt});
}

double orthonormality_defect(const WeightedOperator& op, const Eigen::MatrixXd& u) {
    const Eigen::MatrixXd gram = u.transpose() * op.mass().asDiagonal() * u;
    return (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("unit sphere spectrum", "[spectral]") {
    const WeightedOperator op = sphere_operator(3, 0.0);
    const EigenResult eig = smallest_eigenpairs(op, 5);
    REQUIRE(eig.size() == 5);
    CHECK(std::abs(eig.eigenvalue(0)) <= 1e-8);
    for (int i = 1; i <= 3; ++i) CHECK_THAT(eig.eigenvalue(i), WithinRel(2.0, 1e-4));
    CHECK_THAT(eig.eigenvalue(4), WithinRel(6.0, 0.01));
    for (double r : eig.residuals) CHECK(r <= 1e-8);
    CHECK(orthonormality_defect(op, eig.eigenvectors) <= 1e-8);
    for (int i = 1; i < eig.size(); ++i) CHECK(eig.eigenvalue(i) >= eig.eigenvalue(i - 1));
}

TEST_CASE("flat torus spectrum matches the discrete Fourier oracle", "[spectral]") {
    const double period = 2.0 * std::numbers::pi;
    const TriangleMesh torus = generate_flat_torus(64, 64, period, period);
    const WeightedOperator op = assemble(torus, Potential::zero(torus.vertex_count()));
    const EigenResult eig = smallest_eigenpairs(op, 6);
    const std::vector<double> exact = oracle::torus_grid_spectrum(64, period);

    CHECK(std::abs(eig.eigenvalue(0)) <= 1e-8);
    for (int i = 1; i <= 4; ++i) {
        CHECK_THAT(eig.eigenvalue(i), WithinRel(exact[i], 1e-8));
        CHECK_THAT(eig.eigenvalue(i), WithinRel(1.0, 1e-3));
    }
    CHECK_THAT(eig.eigenvalue(5), WithinRel(exact[5], 1e-8));
    CHECK(eig.eigenvalue(4) - eig.eigenvalue(1) <= 1e-8);
    CHECK(eig.path_used == SolverPath::Iterative);
    CHECK(orthonormality_defect(op, eig.eigenvectors) <= 1e-8);
}

TEST_CASE("k = 1 returns the constant mode", "[spectral]") {
    const WeightedOperator op = sphere_operator(2, 0.9);
    for (SolverPath path : {SolverPath::Dense, SolverPath::Iterative}) {
        const EigenResult eig = smallest_eigenpairs(op, 1, 1e-8, path);
        CHECK(std::abs(eig.eigenvalue(0)) <= 1e-8);
        const Eigen::VectorXd u = eig.eigenvector(0);
        CHECK((u.array() - u.mean()).abs().maxCoeff() <= 1e-8 * u.cwiseAbs().maxCoeff());
        CHECK_THAT(op.mass_norm(u), WithinRel(1.0, 1e-10));
    }
}

TEST_CASE("dense and iterative paths agree", "[spectral]") {
    const double tol = 1e-8;
    const WeightedOperator op = sphere_operator(3, 0.8);
    const EigenResult dense = smallest_eigenpairs(op, 6, tol, SolverPath::Dense);
    const EigenResult iter = smallest_eigenpairs(op, 6, tol, SolverPath::Iterative);
    CHECK(dense.path_used == SolverPath::Dense);
    CHECK(iter.path_used == SolverPath::Iterative);
    for (int i = 0; i < 6; ++i) {
        CAPTURE(i);
        CHECK_THAT(iter.eigenvalue(i), WithinAbs(dense.eigenvalue(i), 10 * tol * (1.0 + dense.eigenvalue(i))));
        CHECK(iter.residuals[i] <= tol);
        CHECK(eigen_residual(op, iter.eigenvalue(i), iter.eigenvector(i)) <= tol);
    }
    CHECK(orthonormality_defect(op, iter.eigenvectors) <= 1e-8);
}

TEST_CASE("iterative path on a larger mesh", "[spectral]") {
    const WeightedOperator op = sphere_operator(4, 0.5);
    const EigenResult eig = smallest_eigenpairs(op, 4, 1e-9, SolverPath::Iterative);
    for (int i = 0; i < eig.size(); ++i) {
        CHECK(eig.residuals[i] <= 1e-9);
        CHECK_THAT(rayleigh_quotient(op, eig.eigenvector(i)), WithinAbs(eig.eigenvalue(i), 1e-9));
    }
    CHECK(eig.iterations <= 200);
}

TEST_CASE("eigenvalues are invariant under constant shifts of f", "[spectral]") {
    const EigenResult a = smallest_eigenpairs(sphere_operator(2, 0.6), 6);
    const EigenResult b = smallest_eigenpairs(sphere_operator(2, 0.6, 2.5), 6);
    for (int i = 0; i < 6; ++i) CHECK_THAT(b.eigenvalue(i), WithinAbs(a.eigenvalue(i), 1e-9 * (1 + a.eigenvalue(i))));
}

TEST_CASE("Rayleigh quotients bound the spectrum", "[spectral]") {
    const WeightedOperator op = sphere_operator(2, -1.1);
    const EigenResult eig = smallest_eigenpairs(op, 2);
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::VectorXd u = rng.uniform_vector(op.size(), -1.0, 1.0);
        CHECK(rayleigh_quotient(op, u) >= eig.eigenvalue(0) - 1e-10);
        CHECK(rayleigh_quotient(op, remove_weighted_mean(op, u)) >= eig.eigenvalue(1) * (1 - 1e-10));
        CHECK(rayleigh_quotient(op, u) <= lambda_max_estimate(op));
    }
    CHECK_THROWS_AS(rayleigh_quotient(op, Eigen::VectorXd::Zero(op.size())), DomainError);
}

TEST_CASE("first positive eigenvalue", "[spectral]") {
    SECTION("tilted sphere") {
        const WeightedOperator op = sphere_operator(3, 0.5);
        const FirstEigenpair first = first_positive_eigenvalue(op);
        CHECK(first.lambda1 >= 2.0 / 3.0);
        CHECK(first.lambda1 > 2.0);
        CHECK(std::abs(first.lambda0) <= 1e-8);
        CHECK(first.residual <= 1e-8);
        CHECK_THAT(weighted_mean(op, first.eigenvector), WithinAbs(0.0, 1e-10));
        CHECK_THAT(op.mass_norm(first.eigenvector), WithinRel(1.0, 1e-10));
        CHECK_THAT(rayleigh_quotient(op, first.eigenvector), WithinRel(first.lambda1, 1e-8));
    }
    SECTION("disconnected meshes have no resolvable gap") {
        std::vector<Eigen::Vector3d> pts = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
        for (int v = 0; v < 4; ++v) pts.push_back(pts[v] + Eigen::Vector3d(10, 0, 0));
        std::vector<Triangle> tris = {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}};
        for (int t = 0; t < 4; ++t) tris.push_back({tris[t][0] + 4, tris[t][1] + 4, tris[t][2] + 4});
        const TriangleMesh mesh(tris, Embedded3D{pts});
        const WeightedOperator op = assemble(mesh, Potential::zero(8));
        CHECK_THROWS_AS(first_positive_eigenvalue(op), ResolutionError);
    }
}

TEST_CASE("argument validation", "[spectral]") {
    const WeightedOperator op = sphere_operator(1, 0.0);
    CHECK_THROWS_AS(smallest_eigenpairs(op, 0), DomainError);
    CHECK_THROWS_AS(smallest_eigenpairs(op, op.size() + 1), DomainError);
    CHECK_THROWS_AS(smallest_eigenpairs(op, 2, 1e-13), DomainError);
    CHECK_THROWS_AS(smallest_eigenpairs(op, 2, 0.1), DomainError);
    CHECK_NOTHROW(smallest_eigenpairs(op, op.size()));
}

TEST_CASE("eigenpair CSV layout", "[spectral]") {
    const WeightedOperator op = sphere_operator(1, 0.0);
    const EigenResult eig = smallest_eigenpairs(op, 3);
    std::ostringstream out;
    write_eigen_csv(eig, out);
    std::istringstream in(out.str());
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        CHECK(std::count(line.begin(), line.end(), ',') == 2);
        ++rows;
    }
    CHECK(rows == op.size() + 1);
}
