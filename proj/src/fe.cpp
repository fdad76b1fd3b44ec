#include "channel/fe.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace channel {

CellGeom CellGeom::make(const std::array<Vec2, 3>& pts) {
    CellGeom g;
    g.p = pts;
    g.area = 0.5 * ((pts[1].x - pts[0].x) * (pts[2].y - pts[0].y) -
                    (pts[2].x - pts[0].x) * (pts[1].y - pts[0].y));
    for (int i = 0; i < 3; ++i) {
        Vec2 e = pts[(i + 1) % 3] - pts[(i + 2) % 3];
        g.grad_l[i] = Vec2{e.y, -e.x} * (1.0 / (2.0 * g.area));
    }
    return g;
}

P2Shape CellGeom::p2(double l1, double l2, double l3) const {
    P2Shape s;
    double l[3] = {l1, l2, l3};
    for (int i = 0; i < 3; ++i) {
        s.N[i] = l[i] * (2.0 * l[i] - 1.0);
        s.dN[i] = grad_l[i] * (4.0 * l[i] - 1.0);
    }
    for (int k = 0; k < 3; ++k) {
        int a = k, b = (k + 1) % 3;
        s.N[3 + k] = 4.0 * l[a] * l[b];
        s.dN[3 + k] = grad_l[a] * (4.0 * l[b]) + grad_l[b] * (4.0 * l[a]);
    }
    return s;
}

std::array<int, 6> FunctionSpaceLayout::cell_vnodes(int c) const {
    const auto& t = mesh->cells[c];
    const auto& e = cell_edges[c];
    return {t[0], t[1], t[2], n_vertices + e[0], n_vertices + e[1], n_vertices + e[2]};
}

FunctionSpaceLayout build_spaces(const TruncatedMesh& mesh, SpaceKind kind) {
    if (mesh.boundary.empty())
        throw ValidationError("build_spaces: mesh carries no boundary tags");

    FunctionSpaceLayout L;
    L.mesh = &mesh;
    L.kind = kind;
    L.n_vertices = (int)mesh.nodes.size();

    std::map<std::pair<int, int>, int> edge_id;
    auto get_edge = [&](int a, int b) {
        auto key = std::minmax(a, b);
        auto it = edge_id.find(key);
        if (it == edge_id.end()) it = edge_id.emplace(key, (int)edge_id.size()).first;
        return it->second;
    };

    L.cell_edges.resize(mesh.cells.size());
    for (size_t c = 0; c < mesh.cells.size(); ++c) {
        const auto& t = mesh.cells[c];
        for (int k = 0; k < 3; ++k) L.cell_edges[c][k] = get_edge(t[k], t[(k + 1) % 3]);
    }
    L.n_edges = (int)edge_id.size();

    L.vnode_pos.resize(L.n_vnodes());
    for (int v = 0; v < L.n_vertices; ++v) L.vnode_pos[v] = mesh.nodes[v];
    for (const auto& [key, e] : edge_id)
        L.vnode_pos[L.n_vertices + e] = (mesh.nodes[key.first] + mesh.nodes[key.second]) * 0.5;

    using NK = FunctionSpaceLayout::NodeKind;
    L.vnode_kind.assign(L.n_vnodes(), NK::Free);
    L.vnode_tangent.assign(L.n_vnodes(), Vec2{});

    auto mark_wall = [&](int nd, BoundaryTag tag) {
        if (L.vnode_kind[nd] == NK::End) return;
        L.vnode_kind[nd] = NK::Wall;
        double x1 = L.vnode_pos[nd].x;
        WallData w = mesh.geom.eval_walls(x1);
        double slope = (tag == BoundaryTag::WallUpper) ? w.df2 : w.df1;
        double len = std::hypot(1.0, slope);
        L.vnode_tangent[nd] = {1.0 / len, slope / len};
    };

    for (const auto& be : mesh.boundary) {
        int enode = L.n_vertices + get_edge(be.n0, be.n1);
        bool is_end = be.tag == BoundaryTag::EndLeft || be.tag == BoundaryTag::EndRight;
        if (kind == SpaceKind::FullDirichlet || is_end) {
            L.vnode_kind[be.n0] = NK::End;
            L.vnode_kind[be.n1] = NK::End;
            L.vnode_kind[enode] = NK::End;
        }
    }
    if (kind == SpaceKind::SlipWalls) {
        for (const auto& be : mesh.boundary) {
            if (be.tag != BoundaryTag::WallLower && be.tag != BoundaryTag::WallUpper) continue;
            mark_wall(be.n0, be.tag);
            mark_wall(be.n1, be.tag);
            mark_wall(L.n_vertices + get_edge(be.n0, be.n1), be.tag);
        }
    }

    std::vector<Eigen::Triplet<double>> trips;
    int nred = 0;
    for (int nd = 0; nd < L.n_vnodes(); ++nd) {
        switch (L.vnode_kind[nd]) {
            case NK::Free:
                trips.emplace_back(2 * nd, nred++, 1.0);
                trips.emplace_back(2 * nd + 1, nred++, 1.0);
                break;
            case NK::Wall:
                trips.emplace_back(2 * nd, nred, L.vnode_tangent[nd].x);
                trips.emplace_back(2 * nd + 1, nred, L.vnode_tangent[nd].y);
                ++nred;
                break;
            case NK::End:
                break;
        }
    }
    L.n_reduced = nred;
    L.Z.resize(2 * L.n_vnodes(), nred);
    L.Z.setFromTriplets(trips.begin(), trips.end());
    return L;
}

namespace {

// Barycentric coordinates of p in cell c.
std::array<double, 3> barycentric(const TruncatedMesh& mesh, int c, const Vec2& p) {
    const auto& t = mesh.cells[c];
    const Vec2& a = mesh.nodes[t[0]];
    const Vec2& b = mesh.nodes[t[1]];
    const Vec2& d = mesh.nodes[t[2]];
    double det = (b.x - a.x) * (d.y - a.y) - (d.x - a.x) * (b.y - a.y);
    double l2 = ((p.x - a.x) * (d.y - a.y) - (d.x - a.x) * (p.y - a.y)) / det;
    double l3 = ((b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y)) / det;
    return {1.0 - l2 - l3, l2, l3};
}

bool inside(const std::array<double, 3>& l, double tol) {
    return l[0] >= -tol && l[1] >= -tol && l[2] >= -tol;
}

}  // namespace

int locate_cell(const TruncatedMesh& mesh, const Vec2& p) {
    double T = mesh.half_length;
    if (p.x < -T - 1e-12 || p.x > T + 1e-12) return -1;
    WallData w = mesh.geom.eval_walls(p.x);
    if (p.y < w.f1 - 1e-12 || p.y > w.f2 + 1e-12) return -1;

    int i = std::clamp((int)std::floor((p.x + T) / (2.0 * T) * mesh.nx), 0, mesh.nx - 1);
    double s = 2.0 * (p.y - w.f1) / (w.f2 - w.f1) - 1.0;
    int j0 = std::clamp((int)std::floor((s + 1.0) / 2.0 * mesh.ny), 0, mesh.ny - 1);

    for (int dj : {0, -1, 1, -2, 2}) {
        int j = j0 + dj;
        if (j < 0 || j >= mesh.ny) continue;
        int base = 4 * (j * mesh.nx + i);
        for (int k = 0; k < 4; ++k)
            if (inside(barycentric(mesh, base + k, p), 1e-10)) return base + k;
    }
    return -1;
}

Vec2 eval_velocity(const FunctionSpaceLayout& layout, const Vector& full_xy, const Vec2& p) {
    int c = locate_cell(*layout.mesh, p);
    if (c < 0) throw ValidationError("eval_velocity: point outside the mesh");
    auto l = barycentric(*layout.mesh, c, p);
    const auto& t = layout.mesh->cells[c];
    CellGeom cg = CellGeom::make({layout.mesh->nodes[t[0]], layout.mesh->nodes[t[1]],
                                  layout.mesh->nodes[t[2]]});
    P2Shape s = cg.p2(l[0], l[1], l[2]);
    auto nds = layout.cell_vnodes(c);
    Vec2 v{};
    for (int a = 0; a < 6; ++a) {
        v.x += s.N[a] * full_xy[2 * nds[a]];
        v.y += s.N[a] * full_xy[2 * nds[a] + 1];
    }
    return v;
}

Mat2 eval_velocity_grad(const FunctionSpaceLayout& layout, const Vector& full_xy, const Vec2& p) {
    int c = locate_cell(*layout.mesh, p);
    if (c < 0) throw ValidationError("eval_velocity_grad: point outside the mesh");
    auto l = barycentric(*layout.mesh, c, p);
    const auto& t = layout.mesh->cells[c];
    CellGeom cg = CellGeom::make({layout.mesh->nodes[t[0]], layout.mesh->nodes[t[1]],
                                  layout.mesh->nodes[t[2]]});
    P2Shape s = cg.p2(l[0], l[1], l[2]);
    auto nds = layout.cell_vnodes(c);
    Mat2 gmat;
    for (int a = 0; a < 6; ++a) {
        gmat(0, 0) += s.dN[a].x * full_xy[2 * nds[a]];
        gmat(0, 1) += s.dN[a].y * full_xy[2 * nds[a]];
        gmat(1, 0) += s.dN[a].x * full_xy[2 * nds[a] + 1];
        gmat(1, 1) += s.dN[a].y * full_xy[2 * nds[a] + 1];
    }
    return gmat;
}

double eval_pressure(const FunctionSpaceLayout& layout, const Vector& pressure, const Vec2& p) {
    int c = locate_cell(*layout.mesh, p);
    if (c < 0) throw ValidationError("eval_pressure: point outside the mesh");
    auto l = barycentric(*layout.mesh, c, p);
    const auto& t = layout.mesh->cells[c];
    return l[0] * pressure[t[0]] + l[1] * pressure[t[1]] + l[2] * pressure[t[2]];
}

}  // namespace channel
