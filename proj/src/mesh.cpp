#include "drift/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>

#include <Eigen/Geometry>

#include "drift/errors.hpp"

namespace drift {

namespace {

int geometry_size(const MeshGeometry& geometry) {
    return std::visit(
        [](const auto& g) -> int {
            if constexpr (std::is_same_v<std::decay_t<decltype(g)>, Embedded3D>) {
                return static_cast<int>(g.positions.size());
            } else {
                return static_cast<int>(g.params.size());
            }
        },
        geometry);
}

// Maps a parameter displacement to its representative in [-L/2, L/2).
double unwrap(double delta, double period) {
    return delta - period * std::floor(delta / period + 0.5);
}

// Signed planar layout of a triangle. Never throws; callers decide what
// counts as degenerate.
std::array<Eigen::Vector2d, 3> planar_layout(const TriangleMesh& mesh, const Triangle& tri) {
    std::array<Eigen::Vector2d, 3> frame;
    frame[0] = Eigen::Vector2d::Zero();
    if (const auto* periodic = std::get_if<Periodic2D>(&mesh.geometry())) {
        const Eigen::Vector2d& q0 = periodic->params[tri[0]];
        for (int c = 1; c < 3; ++c) {
            const Eigen::Vector2d d = periodic->params[tri[c]] - q0;
            frame[c] = {unwrap(d.x(), periodic->period_u), unwrap(d.y(), periodic->period_v)};
        }
        return frame;
    }
    const auto& pos = std::get<Embedded3D>(mesh.geometry()).positions;
    const Eigen::Vector3d e1 = pos[tri[1]] - pos[tri[0]];
    const Eigen::Vector3d e2 = pos[tri[2]] - pos[tri[0]];
    const double len1 = e1.norm();
    if (len1 == 0.0) {
        frame[1] = Eigen::Vector2d::Zero();
        frame[2] = {e2.norm(), 0.0};
        return frame;
    }
    const Eigen::Vector3d axis = e1 / len1;
    frame[1] = {len1, 0.0};
    frame[2] = {e2.dot(axis), e1.cross(e2).norm() / len1};
    return frame;
}

double signed_area(const std::array<Eigen::Vector2d, 3>& f) {
    const Eigen::Vector2d a = f[1] - f[0];
    const Eigen::Vector2d b = f[2] - f[0];
    return 0.5 * (a.x() * b.y() - a.y() * b.x());
}

}  // namespace

TriangleMesh::TriangleMesh(std::vector<Triangle> triangles, MeshGeometry geometry)
    : vertex_count_(geometry_size(geometry)),
      triangles_(std::move(triangles)),
      geometry_(std::move(geometry)) {
    for (const auto& tri : triangles_) {
        for (int v : tri) {
            if (v < 0 || v >= vertex_count_) {
                throw DimensionError("triangle references vertex " + std::to_string(v) +
                                     " but the mesh has " + std::to_string(vertex_count_) +
                                     " vertices");
            }
        }
    }
    if (const auto* periodic = std::get_if<Periodic2D>(&geometry_)) {
        if (!(periodic->period_u > 0.0) || !(periodic->period_v > 0.0)) {
            throw InvalidGridError("periodic geometry needs positive periods");
        }
    }
}

const std::vector<Eigen::Vector3d>& TriangleMesh::positions() const {
    if (const auto* embedded = std::get_if<Embedded3D>(&geometry_)) return embedded->positions;
    throw DimensionError("mesh has periodic 2D geometry, not 3D positions");
}

bool MeshDiagnostics::usable() const noexcept {
    return is_closed && is_oriented && nonmanifold_edge_count == 0 &&
           min_triangle_area > kDegenerateArea;
}

TriangleMesh generate_icosphere(int subdivisions, double radius) {
    if (subdivisions < 0) throw InvalidGridError("subdivision level must be non-negative");
    if (subdivisions > kMaxSubdivisions) {
        throw SizeLimitError("icosphere subdivision " + std::to_string(subdivisions) +
                             " exceeds the limit of " + std::to_string(kMaxSubdivisions));
    }
    if (!(radius > 0.0)) throw InvalidGridError("icosphere radius must be positive");

    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Eigen::Vector3d> pts = {
        {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
        {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
        {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1},
    };
    std::vector<Triangle> tris = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
        {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
        {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
    };
    for (auto& p : pts) p.normalize();

    for (int level = 0; level < subdivisions; ++level) {
        std::map<std::pair<int, int>, int> midpoints;
        auto midpoint = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto [it, inserted] = midpoints.try_emplace(key, static_cast<int>(pts.size()));
            if (inserted) pts.push_back((0.5 * (pts[a] + pts[b])).normalized());
            return it->second;
        };
        std::vector<Triangle> refined;
        refined.reserve(tris.size() * 4);
        for (const auto& [a, b, c] : tris) {
            const int ab = midpoint(a, b);
            const int bc = midpoint(b, c);
            const int ca = midpoint(c, a);
            refined.push_back({a, ab, ca});
            refined.push_back({b, bc, ab});
            refined.push_back({c, ca, bc});
            refined.push_back({ab, bc, ca});
        }
        tris = std::move(refined);
    }
    for (auto& p : pts) p *= radius;
    return TriangleMesh(std::move(tris), Embedded3D{std::move(pts)});
}

TriangleMesh generate_flat_torus(int nu, int nv, double period_u, double period_v) {
    if (nu < 3 || nv < 3) {
        throw InvalidGridError("flat torus grid needs at least 3 cells per direction, got " +
                               std::to_string(nu) + "x" + std::to_string(nv));
    }
    if (!(period_u > 0.0) || !(period_v > 0.0)) {
        throw InvalidGridError("flat torus periods must be positive");
    }
    Periodic2D geometry;
    geometry.period_u = period_u;
    geometry.period_v = period_v;
    geometry.params.reserve(static_cast<std::size_t>(nu) * nv);
    for (int j = 0; j < nv; ++j) {
        for (int i = 0; i < nu; ++i) {
            geometry.params.emplace_back(period_u * i / nu, period_v * j / nv);
        }
    }
    auto index = [nu, nv](int i, int j) { return (i % nu) + nu * (j % nv); };
    std::vector<Triangle> tris;
    tris.reserve(2 * static_cast<std::size_t>(nu) * nv);
    for (int j = 0; j < nv; ++j) {
        for (int i = 0; i < nu; ++i) {
            const int a = index(i, j);
            const int b = index(i + 1, j);
            const int c = index(i + 1, j + 1);
            const int d = index(i, j + 1);
            tris.push_back({a, b, c});
            tris.push_back({a, c, d});
        }
    }
    return TriangleMesh(std::move(tris), std::move(geometry));
}

MeshDiagnostics validate(const TriangleMesh& mesh) {
    MeshDiagnostics diag;
    // Undirected edge -> (uses in a->b direction with a<b, uses in b->a).
    std::map<std::pair<int, int>, std::pair<int, int>> edges;
    double min_area = std::numeric_limits<double>::infinity();
    double min_angle = std::numeric_limits<double>::infinity();

    for (const auto& tri : mesh.triangles()) {
        for (int c = 0; c < 3; ++c) {
            const int a = tri[c];
            const int b = tri[(c + 1) % 3];
            auto& uses = edges[std::minmax(a, b)];
            (a < b ? uses.first : uses.second) += 1;
        }
        const auto frame = planar_layout(mesh, tri);
        const double area = std::abs(signed_area(frame));
        min_area = std::min(min_area, area);
        for (int c = 0; c < 3; ++c) {
            const Eigen::Vector2d e1 = frame[(c + 1) % 3] - frame[c];
            const Eigen::Vector2d e2 = frame[(c + 2) % 3] - frame[c];
            min_angle = std::min(min_angle, std::atan2(2.0 * area, e1.dot(e2)));
        }
    }

    bool oriented = true;
    for (const auto& [key, uses] : edges) {
        const int total = uses.first + uses.second;
        if (total == 1) ++diag.boundary_edge_count;
        if (total > 2) ++diag.nonmanifold_edge_count;
        if (uses.first > 1 || uses.second > 1) oriented = false;
    }
    diag.edge_count = static_cast<int>(edges.size());
    diag.is_closed = diag.boundary_edge_count == 0;
    diag.is_oriented = oriented;
    diag.euler_characteristic = mesh.vertex_count() - diag.edge_count + mesh.triangle_count();
    diag.min_triangle_area = mesh.triangles().empty() ? 0.0 : min_area;
    diag.min_angle = mesh.triangles().empty() ? 0.0 : min_angle;
    return diag;
}

TriangleGeometry triangle_geometry(const TriangleMesh& mesh, int triangle_index) {
    if (triangle_index < 0 || triangle_index >= mesh.triangle_count()) {
        throw DimensionError("triangle index " + std::to_string(triangle_index) + " out of range");
    }
    TriangleGeometry geo;
    geo.local_frame = planar_layout(mesh, mesh.triangles()[triangle_index]);
    const double area = signed_area(geo.local_frame);
    geo.area = std::abs(area);
    if (!(geo.area > kDegenerateArea)) {
        throw DegenerateGeometryError("triangle " + std::to_string(triangle_index) +
                                      " is degenerate (area " + std::to_string(geo.area) + ")");
    }
    for (int c = 0; c < 3; ++c) {
        const Eigen::Vector2d e1 = geo.local_frame[(c + 1) % 3] - geo.local_frame[c];
        const Eigen::Vector2d e2 = geo.local_frame[(c + 2) % 3] - geo.local_frame[c];
        geo.cotangents[c] = e1.dot(e2) / (2.0 * geo.area);
    }
    return geo;
}

}  // namespace drift
