#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "drift/mesh.hpp"

namespace drift {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Per-vertex values of the drift function f.
struct Potential {
    Eigen::VectorXd values;
    /// Catalog entry the values were sampled from, if any.
    std::optional<std::string> descriptor;

    static Potential zero(int vertex_count) { return {Eigen::VectorXd::Zero(vertex_count), "zero"}; }
};

/// Potentials are rejected when |f| exceeds this anywhere (e^{-f} would
/// overflow or flush to zero).
inline constexpr double kMaxPotentialMagnitude = 700.0;

/// Geometry and weight of one triangle, cached for energy evaluation.
struct WeightedTriangle {
    Triangle vertices{};
    double area = 0.0;
    /// Vertex average of e^{-f}.
    double weight = 0.0;
    /// Gradients of the three hat functions in the triangle's local frame.
    std::array<Eigen::Vector2d, 3> hat_gradients{};
};

/// Discrete drifting Laplacian L_f = Δ - ∇f·∇ under the weighted measure
/// e^{-f} dv, stored as the pair (S, M):
///
///   x^T S y ~ ∫ ∇u·∇v e^{-f} dv      (cotangent stiffness, weighted per triangle)
///   x^T M y ~ ∫ u v e^{-f} dv        (lumped, diagonal)
///
/// so that -L_f u = λ u becomes S u = λ M u with λ >= 0.
class WeightedOperator {
public:
    WeightedOperator(SparseMatrix stiffness, Eigen::VectorXd mass,
                     std::vector<WeightedTriangle> triangles);

    const SparseMatrix& stiffness() const noexcept { return stiffness_; }
    /// Diagonal of M.
    const Eigen::VectorXd& mass() const noexcept { return mass_; }
    const std::vector<WeightedTriangle>& triangles() const noexcept { return triangles_; }
    int size() const noexcept { return static_cast<int>(mass_.size()); }

    /// Sum of w_T * Area_T, equal to the trace of M.
    double total_weighted_area() const noexcept { return mass_.sum(); }

    /// x^T M y
    double mass_inner(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
    /// sqrt(x^T M x)
    double mass_norm(const Eigen::VectorXd& x) const;

private:
    SparseMatrix stiffness_;
    Eigen::VectorXd mass_;
    std::vector<WeightedTriangle> triangles_;
};

/// Requires a closed, oriented, non-degenerate mesh; throws AssemblyError
/// otherwise or when the potential is non-finite / out of range.
WeightedOperator assemble(const TriangleMesh& mesh, const Potential& f);

/// Discrete L_f u = -M^{-1} S u.
Eigen::VectorXd apply_drifting_laplacian(const WeightedOperator& op, const Eigen::VectorXd& u);

/// Per-triangle |∇u| of the piecewise-linear interpolant.
Eigen::VectorXd gradient_norms(const TriangleMesh& mesh, const Eigen::VectorXd& u);

/// E_p(u) = Σ_T w_T Area_T |∇u|_T^p, p >= 1.
double energy(const WeightedOperator& op, const Eigen::VectorXd& u, double p);

/// (1^T M u) / (1^T M 1)
double weighted_mean(const WeightedOperator& op, const Eigen::VectorXd& u);

/// u - weighted_mean(u)
Eigen::VectorXd remove_weighted_mean(const WeightedOperator& op, const Eigen::VectorXd& u);

// Per-vertex fields as CSV: one value per line in vertex order. Blank lines
// and lines starting with '#' are ignored.
Eigen::VectorXd read_field_csv(std::istream& in);
Eigen::VectorXd read_field_csv_file(const std::string& path);
void write_field_csv(const Eigen::VectorXd& values, std::ostream& out);

}  // namespace drift
