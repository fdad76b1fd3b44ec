#include "channel/assembly.hpp"

#include <cmath>

namespace channel {

namespace {

struct SubTri {
    std::array<std::array<double, 3>, 3> bary;  // barycentric corners in the parent
};

// Uniform refinement of the reference triangle into 4^levels subtriangles,
// expressed in parent barycentric coordinates.
std::vector<SubTri> subdivide(int levels) {
    std::vector<SubTri> tris = {SubTri{{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}}};
    for (int l = 0; l < levels; ++l) {
        std::vector<SubTri> next;
        next.reserve(4 * tris.size());
        for (const auto& t : tris) {
            std::array<double, 3> m01, m12, m20;
            for (int k = 0; k < 3; ++k) {
                m01[k] = 0.5 * (t.bary[0][k] + t.bary[1][k]);
                m12[k] = 0.5 * (t.bary[1][k] + t.bary[2][k]);
                m20[k] = 0.5 * (t.bary[2][k] + t.bary[0][k]);
            }
            next.push_back({{t.bary[0], m01, m20}});
            next.push_back({{m01, t.bary[1], m12}});
            next.push_back({{m20, m12, t.bary[2]}});
            next.push_back({{m01, m12, m20}});
        }
        tris.swap(next);
    }
    return tris;
}

// Iterates (barycentric point, weight*area) pairs over a cell, optionally on
// a uniformly refined partition.
template <typename F>
void for_quad_points(const CellGeom& cg, int degree, int levels, F&& fn) {
    const auto& rule = triangle_rule(degree);
    if (levels <= 0) {
        for (const auto& q : rule) fn(q.l1, q.l2, q.l3, q.w * cg.area);
        return;
    }
    auto tris = subdivide(levels);
    double frac = 1.0 / (double)tris.size();
    for (const auto& st : tris)
        for (const auto& q : rule) {
            double l[3];
            for (int k = 0; k < 3; ++k)
                l[k] = q.l1 * st.bary[0][k] + q.l2 * st.bary[1][k] + q.l3 * st.bary[2][k];
            fn(l[0], l[1], l[2], q.w * cg.area * frac);
        }
}

CellGeom cell_geom(const FunctionSpaceLayout& L, int c) {
    const auto& t = L.mesh->cells[c];
    return CellGeom::make({L.mesh->nodes[t[0]], L.mesh->nodes[t[1]], L.mesh->nodes[t[2]]});
}

}  // namespace

SpMat assemble_velocity_form(const FunctionSpaceLayout& layout, VelocityForm form,
                             const FlowField* b, int quad_degree) {
    bool needs_field = form == VelocityForm::Convection || form == VelocityForm::Reaction;
    if (needs_field && !b)
        throw ValidationError("assemble_velocity_form: this form needs a frozen field");
    if (!needs_field && b)
        throw ValidationError("assemble_velocity_form: unexpected frozen field");

    int n = 2 * layout.n_vnodes();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(layout.mesh->cells.size() * 144);

    for (size_t c = 0; c < layout.mesh->cells.size(); ++c) {
        CellGeom cg = cell_geom(layout, (int)c);
        auto nds = layout.cell_vnodes((int)c);
        double ke[12][12] = {};

        for_quad_points(cg, quad_degree, 0, [&](double l1, double l2, double l3, double wt) {
            P2Shape s = cg.p2(l1, l2, l3);
            Vec2 bval{};
            Mat2 bgrad;
            if (needs_field) {
                Vec2 x = cg.point(l1, l2, l3);
                if (form == VelocityForm::Convection) bval = b->value(x);
                else bgrad = b->grad(x);
            }
            for (int a = 0; a < 6; ++a)
                for (int bb = 0; bb < 6; ++bb) {
                    switch (form) {
                        case VelocityForm::Grad: {
                            double v = wt * s.dN[a].dot(s.dN[bb]);
                            ke[2 * a][2 * bb] += v;
                            ke[2 * a + 1][2 * bb + 1] += v;
                            break;
                        }
                        case VelocityForm::Mass: {
                            double v = wt * s.N[a] * s.N[bb];
                            ke[2 * a][2 * bb] += v;
                            ke[2 * a + 1][2 * bb + 1] += v;
                            break;
                        }
                        case VelocityForm::Viscous: {
                            // test (a,c), trial (bb,d):
                            // delta_cd grad Na . grad Nb + dNb[c] * dNa[d]
                            double gg = s.dN[a].dot(s.dN[bb]);
                            double da[2] = {s.dN[a].x, s.dN[a].y};
                            double db[2] = {s.dN[bb].x, s.dN[bb].y};
                            for (int cc = 0; cc < 2; ++cc)
                                for (int d = 0; d < 2; ++d)
                                    ke[2 * a + cc][2 * bb + d] +=
                                        wt * ((cc == d ? gg : 0.0) + db[cc] * da[d]);
                            break;
                        }
                        case VelocityForm::DivDiv: {
                            double da[2] = {s.dN[a].x, s.dN[a].y};
                            double db[2] = {s.dN[bb].x, s.dN[bb].y};
                            for (int cc = 0; cc < 2; ++cc)
                                for (int d = 0; d < 2; ++d)
                                    ke[2 * a + cc][2 * bb + d] += wt * da[cc] * db[d];
                            break;
                        }
                        case VelocityForm::Convection: {
                            double v = wt * s.N[a] * (bval.x * s.dN[bb].x + bval.y * s.dN[bb].y);
                            ke[2 * a][2 * bb] += v;
                            ke[2 * a + 1][2 * bb + 1] += v;
                            break;
                        }
                        case VelocityForm::Reaction: {
                            double nn = wt * s.N[a] * s.N[bb];
                            for (int cc = 0; cc < 2; ++cc)
                                for (int d = 0; d < 2; ++d)
                                    ke[2 * a + cc][2 * bb + d] += nn * bgrad(cc, d);
                            break;
                        }
                    }
                }
        });

        for (int a = 0; a < 6; ++a)
            for (int bb = 0; bb < 6; ++bb)
                for (int cc = 0; cc < 2; ++cc)
                    for (int d = 0; d < 2; ++d) {
                        double v = ke[2 * a + cc][2 * bb + d];
                        if (v != 0.0)
                            trips.emplace_back(2 * nds[a] + cc, 2 * nds[bb] + d, v);
                    }
    }

    SpMat M(n, n);
    M.setFromTriplets(trips.begin(), trips.end());
    return M;
}

SpMat assemble_divergence(const FunctionSpaceLayout& layout) {
    std::vector<Eigen::Triplet<double>> trips;
    for (size_t c = 0; c < layout.mesh->cells.size(); ++c) {
        CellGeom cg = cell_geom(layout, (int)c);
        auto nds = layout.cell_vnodes((int)c);
        const auto& t = layout.mesh->cells[c];
        double be[3][12] = {};
        for_quad_points(cg, 4, 0, [&](double l1, double l2, double l3, double wt) {
            P2Shape s = cg.p2(l1, l2, l3);
            double l[3] = {l1, l2, l3};
            for (int q = 0; q < 3; ++q)
                for (int a = 0; a < 6; ++a) {
                    be[q][2 * a] += wt * l[q] * s.dN[a].x;
                    be[q][2 * a + 1] += wt * l[q] * s.dN[a].y;
                }
        });
        for (int q = 0; q < 3; ++q)
            for (int a = 0; a < 6; ++a)
                for (int cc = 0; cc < 2; ++cc)
                    trips.emplace_back(t[q], 2 * nds[a] + cc, be[q][2 * a + cc]);
    }
    SpMat B(layout.n_pressure(), 2 * layout.n_vnodes());
    B.setFromTriplets(trips.begin(), trips.end());
    return B;
}

SpMat assemble_pressure_mass(const FunctionSpaceLayout& layout) {
    std::vector<Eigen::Triplet<double>> trips;
    for (size_t c = 0; c < layout.mesh->cells.size(); ++c) {
        const auto& t = layout.mesh->cells[c];
        double area = layout.mesh->cell_area((int)c);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                trips.emplace_back(t[i], t[j], area * (i == j ? 1.0 / 6.0 : 1.0 / 12.0));
    }
    SpMat M(layout.n_pressure(), layout.n_pressure());
    M.setFromTriplets(trips.begin(), trips.end());
    return M;
}

Vector pressure_integrals(const FunctionSpaceLayout& layout) {
    Vector v = Vector::Zero(layout.n_pressure());
    for (size_t c = 0; c < layout.mesh->cells.size(); ++c) {
        const auto& t = layout.mesh->cells[c];
        double area = layout.mesh->cell_area((int)c);
        for (int i = 0; i < 3; ++i) v[t[i]] += area / 3.0;
    }
    return v;
}

Vector assemble_load(const FunctionSpaceLayout& layout,
                     const std::function<Vec2(const Vec2&)>& f, int quad_degree,
                     const std::function<int(int)>& sublevels) {
    Vector F = Vector::Zero(2 * layout.n_vnodes());
    for (size_t c = 0; c < layout.mesh->cells.size(); ++c) {
        CellGeom cg = cell_geom(layout, (int)c);
        auto nds = layout.cell_vnodes((int)c);
        int lev = sublevels ? sublevels((int)c) : 0;
        for_quad_points(cg, quad_degree, lev, [&](double l1, double l2, double l3, double wt) {
            P2Shape s = cg.p2(l1, l2, l3);
            Vec2 fv = f(cg.point(l1, l2, l3));
            for (int a = 0; a < 6; ++a) {
                F[2 * nds[a]] += wt * s.N[a] * fv.x;
                F[2 * nds[a] + 1] += wt * s.N[a] * fv.y;
            }
        });
    }
    return F;
}

Vector assemble_carrier_load(const FunctionSpaceLayout& layout, const FlowField& g,
                             int quad_degree, const std::function<int(int)>& sublevels) {
    Vector F = Vector::Zero(2 * layout.n_vnodes());
    for (size_t c = 0; c < layout.mesh->cells.size(); ++c) {
        CellGeom cg = cell_geom(layout, (int)c);
        auto nds = layout.cell_vnodes((int)c);
        int lev = sublevels ? sublevels((int)c) : 0;
        for_quad_points(cg, quad_degree, lev, [&](double l1, double l2, double l3, double wt) {
            P2Shape s = cg.p2(l1, l2, l3);
            Vec2 x = cg.point(l1, l2, l3);
            Vec2 gv = g.value(x);
            Mat2 gg = g.grad(x);
            Vec2 conv = gg.apply(gv);  // (g . grad) g
            double D[2][2] = {{gg(0, 0), 0.5 * (gg(0, 1) + gg(1, 0))},
                              {0.5 * (gg(0, 1) + gg(1, 0)), gg(1, 1)}};
            for (int a = 0; a < 6; ++a) {
                double dn[2] = {s.dN[a].x, s.dN[a].y};
                double cv[2] = {conv.x, conv.y};
                for (int d = 0; d < 2; ++d) {
                    double visc = 2.0 * (D[d][0] * dn[0] + D[d][1] * dn[1]);
                    F[2 * nds[a] + d] -= wt * (visc + cv[d] * s.N[a]);
                }
            }
        });
    }
    return F;
}

Vector assemble_inertia_load(const FunctionSpaceLayout& layout, const Vector& full_xy,
                             int quad_degree) {
    Vector F = Vector::Zero(2 * layout.n_vnodes());
    for (size_t c = 0; c < layout.mesh->cells.size(); ++c) {
        CellGeom cg = cell_geom(layout, (int)c);
        auto nds = layout.cell_vnodes((int)c);
        for_quad_points(cg, quad_degree, 0, [&](double l1, double l2, double l3, double wt) {
            P2Shape s = cg.p2(l1, l2, l3);
            Vec2 v{0.0, 0.0};
            Mat2 dv{};
            for (int a = 0; a < 6; ++a) {
                const double vx = full_xy[2 * nds[a]], vy = full_xy[2 * nds[a] + 1];
                v.x += vx * s.N[a];
                v.y += vy * s.N[a];
                dv.m[0][0] += vx * s.dN[a].x;
                dv.m[0][1] += vx * s.dN[a].y;
                dv.m[1][0] += vy * s.dN[a].x;
                dv.m[1][1] += vy * s.dN[a].y;
            }
            const Vec2 conv = dv.apply(v);
            for (int a = 0; a < 6; ++a) {
                F[2 * nds[a]] += wt * conv.x * s.N[a];
                F[2 * nds[a] + 1] += wt * conv.y * s.N[a];
            }
        });
    }
    return F;
}

std::vector<std::array<double, 3>> cellwise_divergence(const FunctionSpaceLayout& layout,
                                                       const Vector& full_xy) {
    std::vector<std::array<double, 3>> div(layout.mesh->cells.size());
    const double corners[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (size_t c = 0; c < layout.mesh->cells.size(); ++c) {
        CellGeom cg = cell_geom(layout, (int)c);
        auto nds = layout.cell_vnodes((int)c);
        for (int q = 0; q < 3; ++q) {
            P2Shape s = cg.p2(corners[q][0], corners[q][1], corners[q][2]);
            double d = 0.0;
            for (int a = 0; a < 6; ++a)
                d += s.dN[a].x * full_xy[2 * nds[a]] + s.dN[a].y * full_xy[2 * nds[a] + 1];
            div[c][q] = d;
        }
    }
    return div;
}

Vector assemble_div_weighted_load(const FunctionSpaceLayout& layout,
                                  const std::vector<std::array<double, 3>>& w) {
    Vector F = Vector::Zero(2 * layout.n_vnodes());
    for (size_t c = 0; c < layout.mesh->cells.size(); ++c) {
        CellGeom cg = cell_geom(layout, (int)c);
        auto nds = layout.cell_vnodes((int)c);
        for_quad_points(cg, 4, 0, [&](double l1, double l2, double l3, double wt) {
            P2Shape s = cg.p2(l1, l2, l3);
            double wv = w[c][0] * l1 + w[c][1] * l2 + w[c][2] * l3;
            for (int a = 0; a < 6; ++a) {
                F[2 * nds[a]] += wt * wv * s.dN[a].x;
                F[2 * nds[a] + 1] += wt * wv * s.dN[a].y;
            }
        });
    }
    return F;
}

double cellwise_l2_norm(const TruncatedMesh& mesh, const std::vector<std::array<double, 3>>& w) {
    double sum = 0.0;
    for (size_t c = 0; c < mesh.cells.size(); ++c) {
        double area = mesh.cell_area((int)c);
        const auto& v = w[c];
        // exact integral of the square of a linear function
        double s = v[0] + v[1] + v[2];
        sum += area / 6.0 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + 0.5 * (s * s - v[0] * v[0] - v[1] * v[1] - v[2] * v[2]));
    }
    return std::sqrt(sum);
}

}  // namespace channel
