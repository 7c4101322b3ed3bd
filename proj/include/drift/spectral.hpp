#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "drift/weighted_operator.hpp"

namespace drift {

enum class SolverPath {
    Auto,
    /// Whitened dense solve of M^{-1/2} S M^{-1/2}.
    Dense,
    /// Shift-invert subspace iteration with Rayleigh-Ritz.
    Iterative,
};

inline constexpr double kDefaultEigenTolerance = 1e-8;
/// Auto picks the dense path at or below this many vertices.
inline constexpr int kDenseVertexLimit = 1200;

/// Smallest eigenpairs of S u = λ M u.
///
/// Residuals are ‖S u - λ M u‖_{M^{-1}} / ((λ + 1) ‖u‖_M); the M^{-1} norm
/// is the dual of the M norm, which makes the residual independent of the
/// mesh scale of M's entries.
struct EigenResult {
    std::vector<double> eigenvalues;
    /// One M-orthonormal eigenvector per column, ascending eigenvalue.
    Eigen::MatrixXd eigenvectors;
    std::vector<double> residuals;
    double tolerance_used = kDefaultEigenTolerance;
    SolverPath path_used = SolverPath::Auto;
    int iterations = 0;

    int size() const noexcept { return static_cast<int>(eigenvalues.size()); }
    double eigenvalue(int i) const { return eigenvalues.at(i); }
    Eigen::VectorXd eigenvector(int i) const { return eigenvectors.col(i); }
};

EigenResult smallest_eigenpairs(const WeightedOperator& op, int k,
                                double tol = kDefaultEigenTolerance,
                                SolverPath path = SolverPath::Auto);

/// (u^T S u) / (u^T M u)
double rayleigh_quotient(const WeightedOperator& op, const Eigen::VectorXd& u);

/// Relative residual of a candidate pair, in the EigenResult convention.
double eigen_residual(const WeightedOperator& op, double lambda, const Eigen::VectorXd& u);

/// Upper estimate of the largest generalized eigenvalue (Gershgorin on the
/// whitened matrix).
double lambda_max_estimate(const WeightedOperator& op);

struct FirstEigenpair {
    double lambda1 = 0.0;
    /// Weighted mean zero, u^T M u = 1.
    Eigen::VectorXd eigenvector;
    double residual = 0.0;
    /// The zero-mode eigenvalue the solver reported alongside.
    double lambda0 = 0.0;
};

/// First eigenvalue above the zero mode. Throws ResolutionError when the
/// gap to the constant mode cannot be resolved at tol.
FirstEigenpair first_positive_eigenvalue(const WeightedOperator& op,
                                         double tol = kDefaultEigenTolerance,
                                         SolverPath path = SolverPath::Auto);

/// CSV: header row of eigenvalues, then one row per vertex with one column
/// per eigenvector.
void write_eigen_csv(const EigenResult& result, std::ostream& out);

const char* to_string(SolverPath path);

}  // namespace drift
