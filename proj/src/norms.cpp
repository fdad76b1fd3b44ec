#include "channel/norms.hpp"

#include <algorithm>
#include <cmath>

#include "channel/quadrature.hpp"

namespace channel {

namespace {

struct LocalField {
    Vec2 v;
    Mat2 dv;
};

LocalField eval_local(const CellGeom& cg, const std::array<int, 6>& nds, const Vector& full,
                      double l1, double l2, double l3) {
    const P2Shape s = cg.p2(l1, l2, l3);
    LocalField r{};
    for (int a = 0; a < 6; ++a) {
        const double vx = full[2 * nds[a]], vy = full[2 * nds[a] + 1];
        r.v.x += vx * s.N[a];
        r.v.y += vy * s.N[a];
        r.dv.m[0][0] += vx * s.dN[a].x;
        r.dv.m[0][1] += vx * s.dN[a].y;
        r.dv.m[1][0] += vy * s.dN[a].x;
        r.dv.m[1][1] += vy * s.dN[a].y;
    }
    return r;
}

}  // namespace

FieldNorms velocity_norms(const FunctionSpaceLayout& layout, const Vector& full_xy) {
    const auto& rule = triangle_rule(8);  // |v|^4 is degree 8
    FieldNorms n;
    for (size_t c = 0; c < layout.mesh->cells.size(); ++c) {
        const auto& t = layout.mesh->cells[c];
        const CellGeom cg = CellGeom::make(
            {layout.mesh->nodes[t[0]], layout.mesh->nodes[t[1]], layout.mesh->nodes[t[2]]});
        const auto nds = layout.cell_vnodes((int)c);
        for (const auto& q : rule) {
            const LocalField f = eval_local(cg, nds, full_xy, q.l1, q.l2, q.l3);
            const double wt = q.w * cg.area;
            const double v2 = f.v.dot(f.v);
            n.l2 += wt * v2;
            n.l4 += wt * v2 * v2;
            n.h1_semi += wt * f.dv.frobenius2();
            n.sym_grad += wt * 2.0 * f.dv.sym_frobenius2();
            n.div += wt * f.dv.trace() * f.dv.trace();
        }
    }
    n.l2 = std::sqrt(n.l2);
    n.l4 = std::pow(n.l4, 0.25);
    n.h1_semi = std::sqrt(n.h1_semi);
    n.sym_grad = std::sqrt(n.sym_grad);
    n.div = std::sqrt(n.div);
    return n;
}

namespace {

// integral of a degree-2 density over the part of a cell inside a < x1 < b
double clipped_integral(const FunctionSpaceLayout& layout, int c, double a, double b,
                        const Vector& full, bool grad_part) {
    const auto& t = layout.mesh->cells[c];
    const std::array<Vec2, 3> corners = {layout.mesh->nodes[t[0]], layout.mesh->nodes[t[1]],
                                         layout.mesh->nodes[t[2]]};
    const CellGeom cg = CellGeom::make(corners);
    const auto nds = layout.cell_vnodes(c);
    const auto poly = clip_cell_to_slab(corners, a, b);
    if (poly.size() < 3) return 0.0;
    const auto& rule = triangle_rule(grad_part ? 2 : 4);
    double sum = 0.0;
    for (size_t k = 1; k + 1 < poly.size(); ++k) {
        const std::array<Vec2, 3> tri = {poly[0], poly[k], poly[k + 1]};
        const CellGeom sub = CellGeom::make(tri);
        for (const auto& q : rule) {
            const Vec2 x = sub.point(q.l1, q.l2, q.l3);
            const Vec2 rel = x - cg.p[0];
            const double l1 = cg.grad_l[1].dot(rel), l2 = cg.grad_l[2].dot(rel);
            const LocalField f = eval_local(cg, nds, full, 1.0 - l1 - l2, l1, l2);
            sum += q.w * sub.area * (grad_part ? f.dv.frobenius2() : f.v.dot(f.v));
        }
    }
    return sum;
}

double slab_integral(const FunctionSpaceLayout& layout, const Vector& full, double a, double b,
                     bool grad_part) {
    if (!(a < b)) throw ValidationError("slab norm: empty interval");
    double sum = 0.0;
    for (size_t c = 0; c < layout.mesh->cells.size(); ++c)
        sum += clipped_integral(layout, (int)c, a, b, full, grad_part);
    return std::sqrt(std::max(sum, 0.0));
}

}  // namespace

double grad_norm_slab(const FunctionSpaceLayout& layout, const Vector& full_xy, double a,
                      double b) {
    return slab_integral(layout, full_xy, a, b, true);
}

double l2_norm_slab(const FunctionSpaceLayout& layout, const Vector& full_xy, double a,
                    double b) {
    return slab_integral(layout, full_xy, a, b, false);
}

double station_flux(const FunctionSpaceLayout& layout, const Vector& full_xy, double x1) {
    const TruncatedMesh& mesh = *layout.mesh;
    const double T = mesh.half_length;
    const double dx = 2.0 * T / mesh.nx;
    // grid column containing (or nearest to) the station
    int col = (int)std::floor((x1 + T) / dx);
    col = std::clamp(col, 0, mesh.nx - 1);
    const auto& rule = triangle_rule(2);
    double flux = 0.0;
    // cells are laid out row-major, 4 per structured quad
    for (int j = 0; j < mesh.ny; ++j)
        for (int k = 0; k < 4; ++k) {
            const int c = 4 * (j * mesh.nx + col) + k;
            const auto& t = mesh.cells[c];
            const CellGeom cg = CellGeom::make(
                {mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]});
            const auto nds = layout.cell_vnodes(c);
            for (const auto& q : rule) {
                const LocalField f = eval_local(cg, nds, full_xy, q.l1, q.l2, q.l3);
                flux += q.w * cg.area * f.v.x / dx;
            }
        }
    return flux;
}

double pressure_l2(const FunctionSpaceLayout& layout, const Vector& pressure) {
    const TruncatedMesh& mesh = *layout.mesh;
    double sum = 0.0;
    for (size_t c = 0; c < mesh.cells.size(); ++c) {
        const auto& t = mesh.cells[c];
        const double A = mesh.cell_area((int)c);
        const double p0 = pressure[t[0]], p1 = pressure[t[1]], p2 = pressure[t[2]];
        const double s = p0 + p1 + p2;
        sum += A / 6.0 * (p0 * p0 + p1 * p1 + p2 * p2 + 0.5 * (s * s - p0 * p0 - p1 * p1 - p2 * p2));
    }
    return std::sqrt(sum);
}

}  // namespace channel
