#include "drift/weighted_operator.hpp"

#include <cmath>
#include <string>

#include "drift/errors.hpp"

namespace drift {

namespace {

void require_length(const Eigen::VectorXd& u, int n, const char* what) {
    if (u.size() != n) {
        throw DimensionError(std::string(what) + ": expected " + std::to_string(n) +
                             " values, got " + std::to_string(u.size()));
    }
}

// Hat-function gradients: ∇φ_i = J (p_{i+2} - p_{i+1}) / (2 A_signed),
// J the rotation by -90 degrees.
std::array<Eigen::Vector2d, 3> hat_gradients(const std::array<Eigen::Vector2d, 3>& frame) {
    const Eigen::Vector2d a = frame[1] - frame[0];
    const Eigen::Vector2d b = frame[2] - frame[0];
    const double twice_area = a.x() * b.y() - a.y() * b.x();
    std::array<Eigen::Vector2d, 3> grads;
    for (int c = 0; c < 3; ++c) {
        const Eigen::Vector2d e = frame[(c + 2) % 3] - frame[(c + 1) % 3];
        grads[c] = Eigen::Vector2d(e.y(), -e.x()) / twice_area;
    }
    return grads;
}

double gradient_norm(const std::array<Eigen::Vector2d, 3>& grads, const Triangle& tri,
                     const Eigen::VectorXd& u) {
    const Eigen::Vector2d g = u[tri[0]] * grads[0] + u[tri[1]] * grads[1] + u[tri[2]] * grads[2];
    return g.norm();
}

}  // namespace

WeightedOperator::WeightedOperator(SparseMatrix stiffness, Eigen::VectorXd mass,
                                   std::vector<WeightedTriangle> triangles)
    : stiffness_(std::move(stiffness)), mass_(std::move(mass)), triangles_(std::move(triangles)) {
    if (stiffness_.rows() != mass_.size() || stiffness_.cols() != mass_.size()) {
        throw DimensionError("stiffness and mass sizes disagree");
    }
}

double WeightedOperator::mass_inner(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    return (x.array() * mass_.array() * y.array()).sum();
}

double WeightedOperator::mass_norm(const Eigen::VectorXd& x) const {
    return std::sqrt(mass_inner(x, x));
}

WeightedOperator assemble(const TriangleMesh& mesh, const Potential& f) {
    const int n = mesh.vertex_count();
    if (f.values.size() != n) {
        throw AssemblyError("potential has " + std::to_string(f.values.size()) +
                            " values for a mesh with " + std::to_string(n) + " vertices");
    }
    for (Eigen::Index i = 0; i < f.values.size(); ++i) {
        const double v = f.values[i];
        if (!std::isfinite(v) || std::abs(v) > kMaxPotentialMagnitude) {
            throw AssemblyError("potential value at vertex " + std::to_string(i) +
                                " is non-finite or beyond ±700");
        }
    }
    const MeshDiagnostics diag = validate(mesh);
    if (!diag.usable()) {
        throw AssemblyError("assembly refused: mesh is not a closed, oriented, non-degenerate "
                            "triangulation (boundary edges " +
                            std::to_string(diag.boundary_edge_count) + ", non-manifold edges " +
                            std::to_string(diag.nonmanifold_edge_count) + ", oriented " +
                            (diag.is_oriented ? "yes" : "no") + ")");
    }

    const Eigen::VectorXd vertex_weight = (-f.values.array()).exp().matrix();
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(9 * mesh.triangles().size());
    Eigen::VectorXd mass = Eigen::VectorXd::Zero(n);
    std::vector<WeightedTriangle> cached;
    cached.reserve(mesh.triangles().size());

    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const Triangle& tri = mesh.triangles()[t];
        const TriangleGeometry geo = triangle_geometry(mesh, t);
        const double w = (vertex_weight[tri[0]] + vertex_weight[tri[1]] + vertex_weight[tri[2]]) / 3.0;
        // Edge (i, j) opposite corner k carries -cot(k)/2.
        for (int k = 0; k < 3; ++k) {
            const int i = tri[(k + 1) % 3];
            const int j = tri[(k + 2) % 3];
            const double c = 0.5 * w * geo.cotangents[k];
            entries.emplace_back(i, j, -c);
            entries.emplace_back(j, i, -c);
            entries.emplace_back(i, i, c);
            entries.emplace_back(j, j, c);
        }
        for (int v : tri) mass[v] += w * geo.area / 3.0;
        cached.push_back({tri, geo.area, w, hat_gradients(geo.local_frame)});
    }

    SparseMatrix stiffness(n, n);
    stiffness.setFromTriplets(entries.begin(), entries.end());
    stiffness.makeCompressed();
    for (int i = 0; i < n; ++i) {
        if (!(mass[i] > 0.0)) {
            throw AssemblyError("vertex " + std::to_string(i) + " has no positive mass (isolated?)");
        }
    }
    return WeightedOperator(std::move(stiffness), std::move(mass), std::move(cached));
}

Eigen::VectorXd apply_drifting_laplacian(const WeightedOperator& op, const Eigen::VectorXd& u) {
    require_length(u, op.size(), "apply_drifting_laplacian");
    return -((op.stiffness() * u).array() / op.mass().array()).matrix();
}

Eigen::VectorXd gradient_norms(const TriangleMesh& mesh, const Eigen::VectorXd& u) {
    require_length(u, mesh.vertex_count(), "gradient_norms");
    Eigen::VectorXd norms(mesh.triangle_count());
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const TriangleGeometry geo = triangle_geometry(mesh, t);
        norms[t] = gradient_norm(hat_gradients(geo.local_frame), mesh.triangles()[t], u);
    }
    return norms;
}

double energy(const WeightedOperator& op, const Eigen::VectorXd& u, double p) {
    if (!(p >= 1.0)) throw DomainError("energy exponent p must be >= 1");
    require_length(u, op.size(), "energy");
    double total = 0.0;
    for (const auto& tri : op.triangles()) {
        const double g = gradient_norm(tri.hat_gradients, tri.vertices, u);
        const double gp = p == 2.0 ? g * g : std::pow(g, p);
        total += tri.weight * tri.area * gp;
    }
    return total;
}

double weighted_mean(const WeightedOperator& op, const Eigen::VectorXd& u) {
    require_length(u, op.size(), "weighted_mean");
    return op.mass().dot(u) / op.mass().sum();
}

Eigen::VectorXd remove_weighted_mean(const WeightedOperator& op, const Eigen::VectorXd& u) {
    return u.array() - weighted_mean(op, u);
}

}  // namespace drift
