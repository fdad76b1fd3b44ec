#include "channel/mesh.hpp"

#include <algorithm>
#include <cmath>

namespace channel {

namespace {

double tri_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

}  // namespace

double TruncatedMesh::cell_area(int c) const {
    const auto& t = cells[c];
    return tri_area(nodes[t[0]], nodes[t[1]], nodes[t[2]]);
}

Vec2 TruncatedMesh::centroid(int c) const {
    const auto& t = cells[c];
    return (nodes[t[0]] + nodes[t[1]] + nodes[t[2]]) * (1.0 / 3.0);
}

double TruncatedMesh::min_quality() const {
    double q = 1.0;
    for (size_t c = 0; c < cells.size(); ++c) {
        const auto& t = cells[c];
        double la = (nodes[t[1]] - nodes[t[2]]).norm();
        double lb = (nodes[t[2]] - nodes[t[0]]).norm();
        double lc = (nodes[t[0]] - nodes[t[1]]).norm();
        double area = tri_area(nodes[t[0]], nodes[t[1]], nodes[t[2]]);
        double s = 0.5 * (la + lb + lc);
        double r_in = area / s;
        double r_circ = la * lb * lc / (4.0 * area);
        q = std::min(q, 2.0 * r_in / r_circ);
    }
    return q;
}

TruncatedMesh build_mesh(const ChannelGeometry& geom, double T, double h) {
    if (geom.family() == ProfileFamily::Bump && T < geom.straight_from() + 1.0)
        throw ValidationError("build_mesh: truncation T must satisfy T >= L + 1");
    if (!(h > 0.0)) throw ValidationError("build_mesh: h must be positive");
    if (!(T > 0.0)) throw ValidationError("build_mesh: T must be positive");

    TruncatedMesh m;
    m.geom = geom;
    m.half_length = T;
    m.h = h;
    m.nx = std::max(1, (int)std::ceil(2.0 * T / h));
    m.ny = std::max(1, (int)std::ceil(2.0 / h));

    int nx = m.nx, ny = m.ny;
    m.nodes.resize((nx + 1) * (ny + 1) + nx * ny);

    auto map_point = [&](double x1, double s) -> Vec2 {
        WallData w = geom.eval_walls(x1);
        return {x1, w.f1 + (s + 1.0) * 0.5 * (w.f2 - w.f1)};
    };

    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) {
            double x1 = -T + 2.0 * T * i / nx;
            double s = -1.0 + 2.0 * j / ny;
            // Pin wall nodes exactly onto the wall graphs.
            if (j == 0) s = -1.0;
            if (j == ny) s = 1.0;
            m.nodes[m.grid_node(i, j)] = map_point(x1, s);
        }
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            double x1 = -T + 2.0 * T * (i + 0.5) / nx;
            double s = -1.0 + 2.0 * (j + 0.5) / ny;
            m.nodes[m.center_node(i, j)] = map_point(x1, s);
        }

    m.cells.reserve(4 * nx * ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            int c00 = m.grid_node(i, j), c10 = m.grid_node(i + 1, j);
            int c11 = m.grid_node(i + 1, j + 1), c01 = m.grid_node(i, j + 1);
            int mid = m.center_node(i, j);
            m.cells.push_back({c00, c10, mid});
            m.cells.push_back({c10, c11, mid});
            m.cells.push_back({c11, c01, mid});
            m.cells.push_back({c01, c00, mid});
        }

    for (int i = 0; i < nx; ++i) {
        m.boundary.push_back({m.grid_node(i, 0), m.grid_node(i + 1, 0), BoundaryTag::WallLower});
        m.boundary.push_back(
            {m.grid_node(i + 1, ny), m.grid_node(i, ny), BoundaryTag::WallUpper});
    }
    for (int j = 0; j < ny; ++j) {
        m.boundary.push_back({m.grid_node(0, j + 1), m.grid_node(0, j), BoundaryTag::EndLeft});
        m.boundary.push_back({m.grid_node(nx, j), m.grid_node(nx, j + 1), BoundaryTag::EndRight});
    }

    for (size_t c = 0; c < m.cells.size(); ++c)
        if (m.cell_area((int)c) <= 0.0)
            throw InvariantError("build_mesh: nonpositive cell orientation");
    if (m.min_quality() < 0.05) throw InvariantError("build_mesh: cell quality below floor");

    return m;
}

SlabSelection slab_submesh(const TruncatedMesh& mesh, double a, double b) {
    if (!(a < b)) throw ValidationError("slab_submesh: need a < b");
    if (a < -mesh.half_length - 1e-12 || b > mesh.half_length + 1e-12)
        throw ValidationError("slab_submesh: interval outside the truncated domain");
    SlabSelection s;
    s.a = a;
    s.b = b;
    for (size_t c = 0; c < mesh.cells.size(); ++c) {
        double xc = mesh.centroid((int)c).x;
        if (xc > a && xc < b) s.cells.push_back((int)c);
    }
    return s;
}

std::vector<Vec2> clip_cell_to_slab(const std::array<Vec2, 3>& tri, double a, double b) {
    // Sutherland-Hodgman against x >= a, then x <= b.
    std::vector<Vec2> poly(tri.begin(), tri.end());
    auto clip = [](const std::vector<Vec2>& in, double x0, int keep_sign) {
        std::vector<Vec2> out;
        size_t n = in.size();
        for (size_t i = 0; i < n; ++i) {
            const Vec2& p = in[i];
            const Vec2& q = in[(i + 1) % n];
            double sp = keep_sign * (p.x - x0);
            double sq = keep_sign * (q.x - x0);
            if (sp >= 0.0) out.push_back(p);
            if ((sp > 0.0 && sq < 0.0) || (sp < 0.0 && sq > 0.0)) {
                double t = (x0 - p.x) / (q.x - p.x);
                out.push_back({x0, p.y + t * (q.y - p.y)});
            }
        }
        return out;
    };
    poly = clip(poly, a, +1);
    if (!poly.empty()) poly = clip(poly, b, -1);
    if (poly.size() < 3) poly.clear();
    return poly;
}

double mesh_area(const TruncatedMesh& mesh) {
    double area = 0.0;
    for (size_t c = 0; c < mesh.cells.size(); ++c) area += mesh.cell_area((int)c);
    return area;
}

double slab_area(const TruncatedMesh& mesh, double a, double b) {
    double area = 0.0;
    for (const auto& t : mesh.cells) {
        std::array<Vec2, 3> tri = {mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]};
        auto poly = clip_cell_to_slab(tri, a, b);
        for (size_t k = 1; k + 1 < poly.size(); ++k)
            area += tri_area(poly[0], poly[k], poly[k + 1]);
    }
    return area;
}

}  // namespace channel
