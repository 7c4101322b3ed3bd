#include "drift/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "drift/errors.hpp"
#include "drift/random.hpp"

namespace drift {

namespace {

// Smallest whitened eigenvalues count as zero below this fraction of the
// largest one.
constexpr double kZeroModeRelative = 1e-9;
constexpr int kIterationsPerPair = 50;
constexpr std::uint64_t kStartSeed = 0x5eed5eedULL;

void fill_residuals(const WeightedOperator& op, EigenResult& result) {
    result.residuals.resize(result.eigenvalues.size());
    for (int i = 0; i < result.size(); ++i) {
        result.residuals[i] = eigen_residual(op, result.eigenvalues[i], result.eigenvectors.col(i));
    }
}

EigenResult dense_solve(const WeightedOperator& op, int k) {
    const Eigen::VectorXd inv_sqrt_mass = op.mass().cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd whitened = Eigen::MatrixXd(op.stiffness());
    whitened = inv_sqrt_mass.asDiagonal() * whitened * inv_sqrt_mass.asDiagonal();
    // Symmetrize away rounding from the two diagonal scalings.
    whitened = 0.5 * (whitened + whitened.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(whitened);
    if (solver.info() != Eigen::Success) throw SolverError("dense eigensolver failed");

    EigenResult result;
    result.path_used = SolverPath::Dense;
    result.eigenvalues.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + k);
    result.eigenvectors = inv_sqrt_mass.asDiagonal() * solver.eigenvectors().leftCols(k);
    return result;
}

// Modified Gram-Schmidt in the M inner product, applied twice. Columns that
// collapse are replaced by fresh random directions and re-orthogonalized.
void mass_orthonormalize(const Eigen::VectorXd& mass, Eigen::MatrixXd& block, Rng& rng) {
    const auto inner = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
        return (x.array() * mass.array() * y.array()).sum();
    };
    for (Eigen::Index j = 0; j < block.cols(); ++j) {
        for (int attempt = 0;; ++attempt) {
            const double before = std::sqrt(inner(block.col(j), block.col(j)));
            for (int pass = 0; pass < 2; ++pass) {
                for (Eigen::Index i = 0; i < j; ++i) {
                    block.col(j) -= inner(block.col(i), block.col(j)) * block.col(i);
                }
            }
            const double after = std::sqrt(inner(block.col(j), block.col(j)));
            if (after > 1e-10 * before && after > 0.0) {
                block.col(j) /= after;
                break;
            }
            if (attempt > 3) throw SolverError("cannot extend the search block to full rank");
            block.col(j) = rng.uniform_vector(block.rows(), -1.0, 1.0);
        }
    }
}

EigenResult iterative_solve(const WeightedOperator& op, int k, double tol) {
    const int n = op.size();
    const int block = std::min(n, k + std::max(k, 12));
    const SparseMatrix& stiffness = op.stiffness();
    const Eigen::VectorXd& mass = op.mass();

    // S + σM is positive definite for σ > 0; a small shift keeps the
    // convergence factor (λ_k + σ)/(λ_{block+1} + σ) close to its best value.
    const double shift = 1e-6 * lambda_max_estimate(op);
    SparseMatrix shifted = stiffness;
    for (int i = 0; i < n; ++i) shifted.coeffRef(i, i) += shift * mass[i];
    Eigen::SimplicialLDLT<SparseMatrix> factor(shifted);
    if (factor.info() != Eigen::Success) throw SolverError("factorization of S + σM failed");

    Rng rng(kStartSeed);
    Eigen::MatrixXd basis(n, block);
    basis.col(0).setOnes();
    for (int j = 1; j < block; ++j) basis.col(j) = rng.uniform_vector(n, -1.0, 1.0);
    mass_orthonormalize(mass, basis, rng);

    EigenResult result;
    result.path_used = SolverPath::Iterative;
    const int budget = kIterationsPerPair * k;
    double worst = std::numeric_limits<double>::infinity();
    for (int iter = 1; iter <= budget; ++iter) {
        Eigen::MatrixXd next = factor.solve(mass.asDiagonal() * basis);
        mass_orthonormalize(mass, next, rng);

        Eigen::MatrixXd projected = next.transpose() * (stiffness * next);
        projected = 0.5 * (projected + projected.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(projected);
        basis = next * ritz.eigenvectors();

        result.eigenvalues.assign(ritz.eigenvalues().data(), ritz.eigenvalues().data() + k);
        result.eigenvectors = basis.leftCols(k);
        result.iterations = iter;
        fill_residuals(op, result);
        worst = *std::max_element(result.residuals.begin(), result.residuals.end());
        if (worst <= tol) return result;
    }
    throw ConvergenceError("subspace iteration did not reach tolerance " + std::to_string(tol) +
                               " within " + std::to_string(budget) +
                               " iterations (worst residual " + std::to_string(worst) + ")",
                           worst);
}

}  // namespace

double eigen_residual(const WeightedOperator& op, double lambda, const Eigen::VectorXd& u) {
    const Eigen::VectorXd r = op.stiffness() * u - lambda * (op.mass().asDiagonal() * u);
    const double dual_norm = std::sqrt((r.array().square() / op.mass().array()).sum());
    return dual_norm / ((std::abs(lambda) + 1.0) * op.mass_norm(u));
}

double lambda_max_estimate(const WeightedOperator& op) {
    const SparseMatrix& s = op.stiffness();
    const Eigen::VectorXd inv_sqrt_mass = op.mass().cwiseSqrt().cwiseInverse();
    double best = 0.0;
    for (int col = 0; col < s.outerSize(); ++col) {
        double row_sum = 0.0;
        for (SparseMatrix::InnerIterator it(s, col); it; ++it) {
            row_sum += std::abs(it.value()) * inv_sqrt_mass[it.row()] * inv_sqrt_mass[col];
        }
        best = std::max(best, row_sum);
    }
    return best;
}

EigenResult smallest_eigenpairs(const WeightedOperator& op, int k, double tol, SolverPath path) {
    const int n = op.size();
    if (k < 1 || k > n) {
        throw DomainError("requested " + std::to_string(k) + " eigenpairs of a " +
                          std::to_string(n) + "-vertex operator");
    }
    if (!(tol >= 1e-12 && tol <= 1e-2)) throw DomainError("eigen tolerance must lie in [1e-12, 1e-2]");

    if (path == SolverPath::Auto) {
        const bool small = n <= kDenseVertexLimit || k + std::max(k, 12) >= n;
        path = small ? SolverPath::Dense : SolverPath::Iterative;
    }
    EigenResult result = path == SolverPath::Dense ? dense_solve(op, k) : iterative_solve(op, k, tol);
    result.tolerance_used = tol;
    if (result.residuals.empty()) fill_residuals(op, result);

    const double worst = *std::max_element(result.residuals.begin(), result.residuals.end());
    if (!(worst <= tol)) {
        throw ConvergenceError("eigenpair residual " + std::to_string(worst) +
                                   " exceeds tolerance " + std::to_string(tol),
                               worst);
    }
    return result;
}

double rayleigh_quotient(const WeightedOperator& op, const Eigen::VectorXd& u) {
    if (u.size() != op.size()) throw DimensionError("rayleigh_quotient: length mismatch");
    const double denom = op.mass_inner(u, u);
    if (!(denom > 0.0)) throw DomainError("rayleigh_quotient of a vector with zero M-norm");
    return u.dot(op.stiffness() * u) / denom;
}

FirstEigenpair first_positive_eigenvalue(const WeightedOperator& op, double tol, SolverPath path) {
    if (op.size() < 2) throw ResolutionError("a single vertex has no positive eigenvalue");
    const EigenResult eig = smallest_eigenpairs(op, 2, tol, path);
    const double lambda0 = eig.eigenvalues[0];
    const double zero_cut =
        std::max({tol, 1e3 * std::abs(lambda0), kZeroModeRelative * lambda_max_estimate(op)});
    if (!(eig.eigenvalues[1] > zero_cut)) {
        throw ResolutionError("second eigenvalue " + std::to_string(eig.eigenvalues[1]) +
                              " is indistinguishable from the zero mode (threshold " +
                              std::to_string(zero_cut) + "); is the mesh connected?");
    }
    FirstEigenpair first;
    first.lambda0 = lambda0;
    first.lambda1 = eig.eigenvalues[1];
    Eigen::VectorXd u = remove_weighted_mean(op, eig.eigenvectors.col(1));
    first.eigenvector = u / op.mass_norm(u);
    first.residual = eigen_residual(op, first.lambda1, first.eigenvector);
    return first;
}

void write_eigen_csv(const EigenResult& result, std::ostream& out) {
    out << std::setprecision(17);
    for (int j = 0; j < result.size(); ++j) out << (j ? "," : "") << result.eigenvalues[j];
    out << '\n';
    for (Eigen::Index i = 0; i < result.eigenvectors.rows(); ++i) {
        for (int j = 0; j < result.size(); ++j) out << (j ? "," : "") << result.eigenvectors(i, j);
        out << '\n';
    }
}

const char* to_string(SolverPath path) {
    switch (path) {
        case SolverPath::Auto: return "auto";
        case SolverPath::Dense: return "dense";
        case SolverPath::Iterative: return "iterative";
    }
    return "unknown";
}

}  // namespace drift
