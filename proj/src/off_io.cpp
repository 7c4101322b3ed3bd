#include <cstddef>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "drift/errors.hpp"
#include "drift/mesh.hpp"

namespace drift {

namespace {

// Line reader that skips blank lines and '#' comments and tracks the
// 1-based number of the last line returned.
class OffLines {
public:
    explicit OffLines(std::istream& in) : in_(in) {}

    bool next(std::string& out) {
        std::string raw;
        while (std::getline(in_, raw)) {
            ++line_;
            if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
            if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
            out = std::move(raw);
            return true;
        }
        return false;
    }

    std::size_t line() const noexcept { return line_; }

private:
    std::istream& in_;
    std::size_t line_ = 0;
};

bool only_whitespace_left(std::istringstream& ss) {
    ss >> std::ws;
    return ss.eof();
}

}  // namespace

TriangleMesh load_off(std::istream& source) {
    OffLines lines(source);
    std::string text;

    if (!lines.next(text)) throw ParseError(lines.line() + 1, "missing OFF header");
    {
        std::istringstream ss(text);
        std::string header;
        ss >> header;
        if (header != "OFF" || !only_whitespace_left(ss)) {
            throw ParseError(lines.line(), "missing OFF header");
        }
    }

    if (!lines.next(text)) throw ParseError(lines.line() + 1, "truncated stream: missing counts line");
    long long nv = -1, nf = -1, ne = 0;
    {
        std::istringstream ss(text);
        if (!(ss >> nv >> nf) || nv < 0 || nf < 0) {
            throw ParseError(lines.line(), "malformed counts line");
        }
        ss >> ne;
    }

    std::vector<Eigen::Vector3d> positions;
    positions.reserve(static_cast<std::size_t>(nv));
    for (long long i = 0; i < nv; ++i) {
        if (!lines.next(text)) {
            throw ParseError(lines.line() + 1, "truncated stream: expected " + std::to_string(nv) +
                                                   " vertices, got " + std::to_string(i));
        }
        std::istringstream ss(text);
        Eigen::Vector3d p;
        if (!(ss >> p.x() >> p.y() >> p.z())) throw ParseError(lines.line(), "malformed vertex");
        positions.push_back(p);
    }

    std::vector<Triangle> triangles;
    triangles.reserve(static_cast<std::size_t>(nf));
    for (long long f = 0; f < nf; ++f) {
        if (!lines.next(text)) {
            throw ParseError(lines.line() + 1, "truncated stream: expected " + std::to_string(nf) +
                                                   " faces, got " + std::to_string(f));
        }
        std::istringstream ss(text);
        int corners = 0;
        if (!(ss >> corners)) throw ParseError(lines.line(), "malformed face");
        if (corners != 3) throw ParseError(lines.line(), "non-triangle face");
        Triangle tri{};
        for (int& v : tri) {
            long long idx = -1;
            if (!(ss >> idx)) throw ParseError(lines.line(), "malformed face");
            if (idx < 0 || idx >= nv) {
                throw ParseError(lines.line(), "vertex index " + std::to_string(idx) + " out of range");
            }
            v = static_cast<int>(idx);
        }
        triangles.push_back(tri);
    }
    return TriangleMesh(std::move(triangles), Embedded3D{std::move(positions)});
}

TriangleMesh load_off_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    try {
        return load_off(in);
    } catch (const ParseError& e) {
        throw ParseError(e.line(), path + ": " + std::string(e.what()).substr(
                                                     0, std::string(e.what()).rfind(" at line ")));
    }
}

void write_off(const TriangleMesh& mesh, std::ostream& sink) {
    sink << "OFF\n" << mesh.vertex_count() << ' ' << mesh.triangle_count() << " 0\n";
    sink << std::setprecision(17);
    if (const auto* periodic = std::get_if<Periodic2D>(&mesh.geometry())) {
        for (const auto& q : periodic->params) sink << q.x() << ' ' << q.y() << " 0\n";
    } else {
        for (const auto& p : mesh.positions()) sink << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
    }
    for (const auto& [a, b, c] : mesh.triangles()) sink << "3 " << a << ' ' << b << ' ' << c << '\n';
}

void write_off_file(const TriangleMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    write_off(mesh, out);
    if (!out) throw IoError("write failed for " + path);
}

}  // namespace drift
