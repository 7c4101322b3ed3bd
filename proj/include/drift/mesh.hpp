#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace drift {

using Triangle = std::array<int, 3>;

/// Vertex positions in 3-space.
struct Embedded3D {
    std::vector<Eigen::Vector3d> positions;
};

/// Intrinsic flat geometry: per-vertex chart coordinates in the rectangle
/// [0, period_u) x [0, period_v), with both directions periodic.
struct Periodic2D {
    std::vector<Eigen::Vector2d> params;
    double period_u = 0.0;
    double period_v = 0.0;
};

using MeshGeometry = std::variant<Embedded3D, Periodic2D>;

/// Triangulated surface. Immutable after construction.
///
/// Construction only checks that indices are in range; topological and
/// geometric checks live in validate() so that broken meshes can still be
/// loaded and diagnosed.
class TriangleMesh {
public:
    TriangleMesh(std::vector<Triangle> triangles, MeshGeometry geometry);

    int vertex_count() const noexcept { return vertex_count_; }
    int triangle_count() const noexcept { return static_cast<int>(triangles_.size()); }
    const std::vector<Triangle>& triangles() const noexcept { return triangles_; }
    const MeshGeometry& geometry() const noexcept { return geometry_; }

    bool is_periodic() const noexcept { return std::holds_alternative<Periodic2D>(geometry_); }

    /// Only valid for Embedded3D meshes.
    const std::vector<Eigen::Vector3d>& positions() const;

private:
    int vertex_count_ = 0;
    std::vector<Triangle> triangles_;
    MeshGeometry geometry_;
};

struct MeshDiagnostics {
    bool is_closed = false;
    bool is_oriented = false;
    int euler_characteristic = 0;
    double min_triangle_area = 0.0;
    double min_angle = 0.0;
    int boundary_edge_count = 0;
    /// Edges with more than two incident triangles.
    int nonmanifold_edge_count = 0;
    int edge_count = 0;

    /// Closed, consistently oriented, edge-manifold and free of degenerate
    /// triangles; the precondition for operator assembly.
    bool usable() const noexcept;
};

struct TriangleGeometry {
    double area = 0.0;
    /// cot of the interior angle at each corner.
    std::array<double, 3> cotangents{};
    /// Isometric planar layout of the three corners.
    std::array<Eigen::Vector2d, 3> local_frame{};
};

inline constexpr double kDegenerateArea = 1e-12;
inline constexpr int kMaxSubdivisions = 8;

TriangleMesh generate_icosphere(int subdivisions, double radius);

/// Regular nu x nv grid on the flat torus, each cell split along its
/// diagonal.
TriangleMesh generate_flat_torus(int nu, int nv, double period_u, double period_v);

MeshDiagnostics validate(const TriangleMesh& mesh);

/// Throws DegenerateGeometryError when the triangle area is at or below
/// kDegenerateArea.
TriangleGeometry triangle_geometry(const TriangleMesh& mesh, int triangle_index);

/// ASCII OFF reader. Does not run validate().
TriangleMesh load_off(std::istream& source);
TriangleMesh load_off_file(const std::string& path);

/// Writes 17 significant digits. Periodic meshes are written as their chart
/// layout with z = 0.
void write_off(const TriangleMesh& mesh, std::ostream& sink);
void write_off_file(const TriangleMesh& mesh, const std::string& path);

}  // namespace drift
