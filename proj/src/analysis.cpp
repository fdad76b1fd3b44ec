#include "channel/analysis.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <unordered_map>

#include "channel/quadrature.hpp"

namespace channel {

namespace {

constexpr double kDivPenalty = 1e8;  // divergence penalty for the Korn pencil

using Ldlt = Eigen::SimplicialLDLT<SpMat>;

[[noreturn]] void stagnation(const EigenEstimate& est) {
    std::string msg = "eigensolver stagnation; Rayleigh history tail:";
    for (size_t k = est.history.size() > 5 ? est.history.size() - 5 : 0;
         k < est.history.size(); ++k)
        msg += " " + std::to_string(est.history[k]);
    throw SolverError(msg);
}

// Number of pencil eigenvalues of (A, M) strictly below sigma, by Sylvester
// inertia of A - sigma M (unpivoted LDLT; callers nudge sigma on breakdown).
int eigs_below(const SpMat& A, const SpMat& M, double sigma, bool& ok) {
    Ldlt f(SpMat(A - sigma * M));
    const Vector d = f.vectorD();
    ok = f.info() == Eigen::Success && d.allFinite() && (d.array() != 0.0).all();
    int neg = 0;
    for (int i = 0; i < d.size(); ++i) neg += d[i] < 0.0;
    return neg;
}

// Smallest eigenvalue of A x = lambda M x (both SPD). Plain inverse power
// steps give an upper bound; inertia bisection then certifies a shift
// strictly below the minimum, from which shifted inverse power iteration
// cannot lock onto a higher mode. tol must stay above the roundoff floor of
// any penalty terms inside the Rayleigh quotient.
EigenEstimate smallest_eig(const SpMat& A, const SpMat& M, double tol) {
    Ldlt chol(A);
    if (chol.info() != Eigen::Success)
        throw SolverError("eigensolver: factorization of the stiffness form failed");

    std::mt19937_64 rng(42);
    std::normal_distribution<double> gauss;
    Vector x(A.rows());
    for (int i = 0; i < x.size(); ++i) x[i] = gauss(rng);

    EigenEstimate est;
    const auto rayleigh = [&](Vector& v) {
        const double mv = v.dot(M * v);
        if (!(mv > 0.0)) throw SolverError("eigensolver: iterate collapsed");
        v /= std::sqrt(mv);
        return v.dot(A * v);
    };

    double rho = rayleigh(x);
    for (int it = 0; it < 5; ++it) {
        x = chol.solve(Vector(M * x));
        rho = rayleigh(x);
        est.history.push_back(rho);
        ++est.iterations;
    }

    // bracket the minimum: rho is an upper bound, 0 a lower one
    double lo = 0.0, hi = rho * (1.0 + 1e-12);
    while (hi - lo > 1e-3 * hi) {
        double mid = 0.5 * (lo + hi);
        bool ok = false;
        int neg = eigs_below(A, M, mid, ok);
        if (!ok) {  // unlucky pivot: nudge the shift
            mid += 1e-6 * (hi - lo);
            neg = eigs_below(A, M, mid, ok);
            if (!ok) stagnation(est);
        }
        (neg >= 1 ? hi : lo) = mid;
        est.history.push_back(mid);
        ++est.iterations;
    }

    // shifted inverse power from the certified shift
    Eigen::SparseLU<SpMat> lu(SpMat(A - lo * M));
    if (lu.info() != Eigen::Success)
        throw SolverError("eigensolver: shifted factorization failed");
    double prev = rho;
    for (int it = 0; it < 300; ++it) {
        Vector y = lu.solve(Vector(M * x));
        if (!y.allFinite()) break;
        x = y;
        prev = rho;
        rho = rayleigh(x);
        est.history.push_back(rho);
        ++est.iterations;
        if (std::abs(rho - prev) <= tol * std::abs(rho)) {
            est.eigenvalue = rho;
            return est;
        }
    }
    stagnation(est);
}

// Sparse null-space prolongation for functionals with pairwise disjoint
// supports: each constraint eliminates its largest-coefficient dof.
SpMat null_space_map(const std::vector<Vector>& cs, int n) {
    std::vector<int> owner(n, -1);
    std::vector<int> pivot(cs.size());
    for (size_t j = 0; j < cs.size(); ++j) {
        int p = -1;
        for (int i = 0; i < n; ++i)
            if (cs[j][i] != 0.0) {
                if (owner[i] != -1)
                    throw SolverError("eigensolver: constraint supports overlap");
                owner[i] = (int)j;
                if (p < 0 || std::abs(cs[j][i]) > std::abs(cs[j][p])) p = i;
            }
        if (p < 0) throw SolverError("eigensolver: empty constraint");
        pivot[j] = p;
    }
    std::vector<int> col(n, -1);
    int nc = 0;
    std::vector<bool> is_pivot(n, false);
    for (int p : pivot) is_pivot[p] = true;
    for (int i = 0; i < n; ++i)
        if (!is_pivot[i]) col[i] = nc++;

    std::vector<Eigen::Triplet<double>> trips;
    for (int i = 0; i < n; ++i)
        if (!is_pivot[i]) trips.emplace_back(i, col[i], 1.0);
    for (size_t j = 0; j < cs.size(); ++j) {
        const double cp = cs[j][pivot[j]];
        for (int i = 0; i < n; ++i)
            if (cs[j][i] != 0.0 && i != pivot[j])
                trips.emplace_back(pivot[j], col[i], -cs[j][i] / cp);
    }
    SpMat W(n, nc);
    W.setFromTriplets(trips.begin(), trips.end());
    return W;
}

SpMat reduce(const FunctionSpaceLayout& layout, const SpMat& full) {
    return SpMat(layout.Z.transpose() * full * layout.Z);
}

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

CellGeom cell_geom(const TruncatedMesh& mesh, int c) {
    const auto& t = mesh.cells[c];
    return CellGeom::make({mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]});
}

}  // namespace

std::vector<Vector> flux_functionals(const FunctionSpaceLayout& layout) {
    const TruncatedMesh& mesh = *layout.mesh;
    // edge vnode lookup by vertex pair
    std::unordered_map<std::int64_t, int> edge_of;
    const auto key = [&](int a, int b) {
        if (a > b) std::swap(a, b);
        return (std::int64_t)a * layout.n_vertices + b;
    };
    for (size_t c = 0; c < mesh.cells.size(); ++c) {
        const auto& t = mesh.cells[c];
        const auto nds = layout.cell_vnodes((int)c);
        for (int k = 0; k < 3; ++k) edge_of[key(t[k], t[(k + 1) % 3])] = nds[3 + k];
    }

    std::vector<Vector> out;
    for (int i = 1; i < mesh.nx; ++i) {
        Vector F = Vector::Zero(2 * layout.n_vnodes());
        for (int j = 0; j < mesh.ny; ++j) {
            const int v0 = mesh.grid_node(i, j), v1 = mesh.grid_node(i, j + 1);
            const int em = edge_of.at(key(v0, v1));
            const double len = mesh.nodes[v1].y - mesh.nodes[v0].y;
            // Simpson: exact for the quadratic trace of v1 along the edge
            F[2 * v0] += len / 6.0;
            F[2 * em] += len * 4.0 / 6.0;
            F[2 * v1] += len / 6.0;
        }
        Vector red = layout.to_reduced_rhs(F);
        const double nrm = red.norm();
        if (nrm > 0.0) red /= nrm;
        out.push_back(std::move(red));
    }
    return out;
}

EigenEstimate poincare_constant(const FunctionSpaceLayout& layout) {
    const SpMat K = reduce(layout, assemble_velocity_form(layout, VelocityForm::Grad));
    const SpMat M = reduce(layout, assemble_velocity_form(layout, VelocityForm::Mass));
    const SpMat W = null_space_map(flux_functionals(layout), layout.n_reduced);
    EigenEstimate est = smallest_eig(SpMat(W.transpose() * K * W),
                                     SpMat(W.transpose() * M * W), 1e-10);
    if (!(est.eigenvalue > 0.0)) throw SolverError("poincare: nonpositive minimal eigenvalue");
    est.value = 1.0 / std::sqrt(est.eigenvalue);
    return est;
}

EigenEstimate korn_constant(const FunctionSpaceLayout& layout) {
    const SpMat V = reduce(layout, assemble_velocity_form(layout, VelocityForm::Viscous));
    const SpMat D = reduce(layout, assemble_velocity_form(layout, VelocityForm::DivDiv));
    const SpMat G = reduce(layout, assemble_velocity_form(layout, VelocityForm::Grad));
    const SpMat A = V + SpMat(kDivPenalty * D);
    // the penalty contributes ~gamma*eps_mach of roundoff to the quotient
    EigenEstimate est = smallest_eig(A, G, 3e-8);
    est.value = est.eigenvalue;
    if (!(est.value > 0.0))
        throw SolverError("korn: zero minimal quotient (constraint leak, rigid motion?)");
    return est;
}

namespace {

// load vector (|v|^2 v, phi) of a discrete field (gradient of the L4 energy)
Vector cubic_load(const FunctionSpaceLayout& layout, const Vector& full) {
    const auto& rule = triangle_rule(8);
    Vector L = Vector::Zero(2 * layout.n_vnodes());
    for (size_t c = 0; c < layout.mesh->cells.size(); ++c) {
        const CellGeom cg = cell_geom(*layout.mesh, (int)c);
        const auto nds = layout.cell_vnodes((int)c);
        for (const auto& q : rule) {
            const P2Shape s = cg.p2(q.l1, q.l2, q.l3);
            Vec2 v{};
            for (int a = 0; a < 6; ++a) {
                v.x += full[2 * nds[a]] * s.N[a];
                v.y += full[2 * nds[a] + 1] * s.N[a];
            }
            const double wt = q.w * cg.area * v.dot(v);
            for (int a = 0; a < 6; ++a) {
                L[2 * nds[a]] += wt * v.x * s.N[a];
                L[2 * nds[a] + 1] += wt * v.y * s.N[a];
            }
        }
    }
    return L;
}

}  // namespace

EmbeddingEstimate embedding_bound(const FunctionSpaceLayout& layout, int samples,
                                  std::uint64_t seed) {
    if (samples < 1) throw ValidationError("embedding: need at least one sample");
    const SpMat K = reduce(layout, assemble_velocity_form(layout, VelocityForm::Grad));
    Ldlt chol(K);
    if (chol.info() != Eigen::Success)
        throw SolverError("embedding: gradient form not factorizable");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    const auto quotient = [&](const Vector& red) {
        const FieldNorms n = velocity_norms(layout, layout.to_full(red));
        return n.h1_semi > 0.0 ? n.l4 / n.h1_semi : 0.0;
    };

    EmbeddingEstimate best;
    best.samples = samples;
    for (int s = 0; s < samples; ++s) {
        Vector v(layout.n_reduced);
        for (int i = 0; i < v.size(); ++i) v[i] = gauss(rng);
        const double r = quotient(v);
        if (r > best.value) {
            best.value = r;
            best.maximizer = v;
        }
    }
    if (!(best.value > 0.0)) throw ValidationError("embedding: degenerate (all-zero) samples");

    // local ascent: power iteration on the L4 energy gradient
    Vector v = best.maximizer;
    for (int it = 0; it < 30; ++it) {
        Vector w = chol.solve(layout.to_reduced_rhs(cubic_load(layout, layout.to_full(v))));
        const double nw = std::sqrt(w.dot(K * w));
        if (!(nw > 0.0)) break;
        w /= nw;
        const double r = quotient(w);
        ++best.ascent_steps;
        if (r <= best.value * (1.0 + 1e-9)) {
            if (r > best.value) {
                best.value = r;
                best.maximizer = w;
            }
            break;
        }
        best.value = r;
        best.maximizer = w;
        v = w;
    }
    return best;
}

namespace {

Vector pressure_load(const FunctionSpaceLayout& layout,
                     const std::function<double(const Vec2&)>& f, int degree) {
    const auto& rule = triangle_rule(degree);
    Vector F = Vector::Zero(layout.n_pressure());
    for (size_t c = 0; c < layout.mesh->cells.size(); ++c) {
        const auto& t = layout.mesh->cells[c];
        const CellGeom cg = cell_geom(*layout.mesh, (int)c);
        for (const auto& q : rule) {
            const double fv = f(cg.point(q.l1, q.l2, q.l3));
            const double wt = q.w * cg.area * fv;
            F[t[0]] += wt * q.l1;
            F[t[1]] += wt * q.l2;
            F[t[2]] += wt * q.l3;
        }
    }
    return F;
}

double scalar_l2(const TruncatedMesh& mesh, const std::function<double(const Vec2&)>& f,
                 int degree) {
    const auto& rule = triangle_rule(degree);
    double s = 0.0;
    for (size_t c = 0; c < mesh.cells.size(); ++c) {
        const CellGeom cg = cell_geom(mesh, (int)c);
        for (const auto& q : rule) {
            const double fv = f(cg.point(q.l1, q.l2, q.l3));
            s += q.w * cg.area * fv * fv;
        }
    }
    return std::sqrt(s);
}

}  // namespace

BogovskiiResult bogovskii_bound(const FunctionSpaceLayout& layout,
                                const std::function<double(const Vec2&)>& f, int quad_degree) {
    if (layout.kind != SpaceKind::FullDirichlet)
        throw ValidationError("bogovskii: needs a fully clamped (H1_0) layout");

    const Vector Fq = pressure_load(layout, f, quad_degree);
    const double fnorm = scalar_l2(*layout.mesh, f, quad_degree);
    BogovskiiResult res;
    res.a = Vector::Zero(layout.n_reduced);
    if (fnorm == 0.0) return res;

    const double area = mesh_area(*layout.mesh);
    if (std::abs(Fq.sum()) > 1e-10 * fnorm * std::sqrt(area))
        throw ValidationError("bogovskii: right-hand side is not mean-zero");

    const SpMat K = reduce(layout, assemble_velocity_form(layout, VelocityForm::Grad));
    const SpMat B_red = SpMat(assemble_divergence(layout) * layout.Z);
    const Vector gauge = pressure_integrals(layout);
    SaddleSolver saddle(layout, K, B_red, gauge);
    auto sol = saddle.solve(Vector::Zero(layout.n_reduced), Fq);
    res.a = sol.v;
    res.ratio = std::sqrt(std::max(res.a.dot(K * res.a), 0.0)) / fnorm;

    Vector r = B_red * res.a - Fq;
    r -= (r.sum() / gauge.sum()) * gauge;  // defect modulo the gauge multiplier
    Ldlt mp(assemble_pressure_mass(layout));
    res.residual = std::sqrt(std::max(r.dot(mp.solve(r)), 0.0)) / fnorm;
    return res;
}

double bogovskii_battery(const FunctionSpaceLayout& layout) {
    const double area = mesh_area(*layout.mesh);
    const std::vector<std::function<double(const Vec2&)>> raw = {
        [](const Vec2& x) { return x.x; },
        [](const Vec2& x) { return x.y; },
        [](const Vec2& x) { return x.x * x.y; },
        [](const Vec2& x) { return std::sin(M_PI * x.x); },
        [](const Vec2& x) { return std::sin(M_PI * x.y); },
    };
    double m5 = 0.0;
    for (const auto& f : raw) {
        const double mean = pressure_load(layout, f, 8).sum() / area;
        const auto fs = [&f, mean](const Vec2& x) { return f(x) - mean; };
        m5 = std::max(m5, bogovskii_bound(layout, fs, 8).ratio);
    }
    return m5;
}

double weighted_grad2(const FunctionSpaceLayout& layout, const Vector& full_xy, double a,
                      double b, double w_at_a, double w_at_b) {
    if (!(a < b)) throw ValidationError("weighted slab integral: empty interval");
    const double slope = (w_at_b - w_at_a) / (b - a);
    const auto& rule = triangle_rule(4);  // linear weight times quadratic density
    double sum = 0.0;
    for (size_t c = 0; c < layout.mesh->cells.size(); ++c) {
        const auto& t = layout.mesh->cells[c];
        const std::array<Vec2, 3> corners = {layout.mesh->nodes[t[0]], layout.mesh->nodes[t[1]],
                                             layout.mesh->nodes[t[2]]};
        const auto poly = clip_cell_to_slab(corners, a, b);
        if (poly.size() < 3) continue;
        const CellGeom cg = CellGeom::make(corners);
        const auto nds = layout.cell_vnodes((int)c);
        for (size_t k = 1; k + 1 < poly.size(); ++k) {
            const CellGeom sub = CellGeom::make({poly[0], poly[k], poly[k + 1]});
            for (const auto& q : rule) {
                const Vec2 x = sub.point(q.l1, q.l2, q.l3);
                const Vec2 rel = x - cg.p[0];
                const double l1 = cg.grad_l[1].dot(rel), l2 = cg.grad_l[2].dot(rel);
                const LocalField fld = eval_local(cg, nds, full_xy, 1.0 - l1 - l2, l1, l2);
                sum += q.w * sub.area * (w_at_a + slope * (x.x - a)) * fld.dv.frobenius2();
            }
        }
    }
    return sum;
}

DecayReport decay_profile(const SolutionBundle& bundle, const std::vector<double>& t_grid) {
    if (!bundle.converged) throw ValidationError("decay: needs a converged bundle");
    const FunctionSpaceLayout& layout = *bundle.layout;
    const double T = layout.mesh->half_length;
    const Vector full = bundle.full_velocity();

    DecayReport rep;
    rep.t_grid = t_grid;
    for (double t : t_grid) {
        if (t < 1.0 - T || t > T) throw ValidationError("decay: t outside the truncation");
        double yp = weighted_grad2(layout, full, t - 1.0, t, 0.0, 1.0);
        if (t < T - 1e-12) {
            const double g = grad_norm_slab(layout, full, t, T);
            yp += g * g;
        }
        rep.y_plus.push_back(yp);
        rep.dy_plus.push_back(weighted_grad2(layout, full, t - 1.0, t, 1.0, 1.0));
        double ym = weighted_grad2(layout, full, -t, -t + 1.0, 1.0, 0.0);
        if (-t > -T + 1e-12) {
            const double g = grad_norm_slab(layout, full, -T, -t);
            ym += g * g;
        }
        rep.y_minus.push_back(ym);
    }

    double ymax = 0.0;
    for (double y : rep.y_plus) ymax = std::max(ymax, y);
    if (ymax < 1e-14) {
        rep.exact_zero = true;
        return rep;
    }

    // log-linear fit on [2d + 1, T - 1]
    rep.fit_window[0] = 2.0 * bundle.params.cutoffs.dist + 1.0;
    rep.fit_window[1] = T - 1.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    int n = 0;
    for (size_t k = 0; k < t_grid.size(); ++k) {
        const double t = t_grid[k], y = rep.y_plus[k];
        if (t < rep.fit_window[0] - 1e-9 || t > rep.fit_window[1] + 1e-9 || y <= 0.0) continue;
        const double ly = std::log(y);
        sx += t;
        sy += ly;
        sxx += t * t;
        sxy += t * ly;
        syy += ly * ly;
        ++n;
    }
    if (n < 2) throw ValidationError("decay: fewer than two grid points in the fit window");
    const double det = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / det;
    rep.fitted_rate = -slope;
    const double cov = n * sxy - sx * sy;
    const double den = det * (n * syy - sy * sy);
    rep.r_squared = den > 0.0 ? cov * cov / den : 1.0;
    rep.C4_empirical = rep.fitted_rate > 0.0 ? 1.0 / rep.fitted_rate : 0.0;
    return rep;
}

namespace {

struct SlabAccum {
    double grad2 = 0.0, l2 = 0.0, l4 = 0.0;
};

// norms of u = g + v on a < x1 < b with exact cell cuts
SlabAccum combined_slab(const FunctionSpaceLayout& layout, const Vector& full,
                        const CarrierField& g, double a, double b) {
    const auto& rule = triangle_rule(8);
    SlabAccum acc;
    for (size_t c = 0; c < layout.mesh->cells.size(); ++c) {
        const auto& t = layout.mesh->cells[c];
        const std::array<Vec2, 3> corners = {layout.mesh->nodes[t[0]], layout.mesh->nodes[t[1]],
                                             layout.mesh->nodes[t[2]]};
        const auto poly = clip_cell_to_slab(corners, a, b);
        if (poly.size() < 3) continue;
        const CellGeom cg = CellGeom::make(corners);
        const auto nds = layout.cell_vnodes((int)c);
        for (size_t k = 1; k + 1 < poly.size(); ++k) {
            const CellGeom sub = CellGeom::make({poly[0], poly[k], poly[k + 1]});
            for (const auto& q : rule) {
                const Vec2 x = sub.point(q.l1, q.l2, q.l3);
                const Vec2 rel = x - cg.p[0];
                const double l1 = cg.grad_l[1].dot(rel), l2 = cg.grad_l[2].dot(rel);
                LocalField fld = eval_local(cg, nds, full, 1.0 - l1 - l2, l1, l2);
                const Vec2 gv = g.value(x);
                const Mat2 gd = g.grad(x);
                fld.v = fld.v + gv;
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j) fld.dv.m[i][j] += gd.m[i][j];
                const double wt = q.w * sub.area;
                const double v2 = fld.v.dot(fld.v);
                acc.grad2 += wt * fld.dv.frobenius2();
                acc.l2 += wt * v2;
                acc.l4 += wt * v2 * v2;
            }
        }
    }
    return acc;
}

}  // namespace

GrowthReport growth_profile(const SolutionBundle& bundle, const std::vector<double>& t_grid) {
    if (!bundle.converged) throw ValidationError("growth: needs a converged bundle");
    const FunctionSpaceLayout& layout = *bundle.layout;
    const double T = layout.mesh->half_length;
    const CarrierField g(bundle.params);
    const Vector full = bundle.full_velocity();

    GrowthReport rep;
    rep.t_grid = t_grid;
    for (double t : t_grid) {
        if (t <= 1.0 || t > T + 1e-12) throw ValidationError("growth: t outside (1, T]");
        const SlabAccum slab = combined_slab(layout, full, g, t - 1.0, t);
        rep.slab_h1.push_back(std::sqrt(slab.l2 + slab.grad2));
        rep.slab_l4.push_back(std::pow(slab.l4, 0.25));
        const SlabAccum whole = combined_slab(layout, full, g, -t, t);
        const double cum = std::sqrt(whole.grad2);
        rep.cumulative.push_back(cum);
        rep.C6_empirical = std::max(rep.C6_empirical, cum / (1.0 + std::sqrt(t)));
    }
    return rep;
}

ProbeReport uniqueness_probe(const FunctionSpaceLayout& layout, const CarrierParams& params,
                             const std::vector<Vector>& starts, const PicardOptions& opts) {
    if (starts.empty()) throw ValidationError("probe: no starts given");
    for (const Vector& s : starts)
        if (s.size() != layout.n_reduced)
            throw ValidationError("probe: a start does not conform to the layout");

    ProbeReport rep;
    bool all_converged = true;
    for (const Vector& s : starts) {
        try {
            rep.runs.push_back(picard_solve(layout, params, opts, nullptr, &s));
            all_converged = all_converged && rep.runs.back().converged;
        } catch (const SolverError&) {
            all_converged = false;
            SolutionBundle failed;
            failed.params = params;
            failed.layout = &layout;
            failed.v = Vector::Zero(layout.n_reduced);
            failed.p = Vector::Zero(layout.n_pressure());
            rep.runs.push_back(std::move(failed));
        }
    }

    const SpMat H1 =
        reduce(layout, SpMat(assemble_velocity_form(layout, VelocityForm::Grad) +
                             assemble_velocity_form(layout, VelocityForm::Mass)));
    const size_t n = rep.runs.size();
    rep.distances.assign(n, std::vector<double>(n, 0.0));
    size_t wi = 0, wj = n > 1 ? 1 : 0;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) {
            const Vector d = rep.runs[i].v - rep.runs[j].v;
            const double dist = std::sqrt(std::max(d.dot(H1 * d), 0.0));
            rep.distances[i][j] = rep.distances[j][i] = dist;
            if (dist > rep.max_distance) {
                rep.max_distance = dist;
                wi = i;
                wj = j;
            }
        }

    for (const auto& run : rep.runs)
        for (size_t k = 2; k < run.history.size(); ++k) {
            const double prev = run.history[k - 1].increment;
            if (prev > 1e-14)
                rep.contraction_estimate =
                    std::max(rep.contraction_estimate, run.history[k].increment / prev);
        }

    // growth series of the worst difference field, truncation zeta
    if (n > 1) {
        const Vector diff = layout.to_full(Vector(rep.runs[wi].v - rep.runs[wj].v));
        const double T = layout.mesh->half_length;
        for (double t = 2.0; t <= T + 1e-12; t += 1.0) {
            double y = weighted_grad2(layout, diff, t - 1.0, t, 1.0, 0.0) +
                       weighted_grad2(layout, diff, -t, -t + 1.0, 0.0, 1.0);
            if (t - 1.0 > -(t - 1.0)) {
                const double g = grad_norm_slab(layout, diff, -(t - 1.0), t - 1.0);
                y += g * g;
            }
            rep.t_grid.push_back(t);
            rep.y_diff.push_back(y);
            if (t >= std::max(2.0, 0.5 * T))
                rep.tail_normalized = std::max(rep.tail_normalized, y / (t * t * t));
        }
    }

    if (!all_converged)
        rep.verdict = "inconclusive";
    else
        rep.verdict = rep.max_distance <= 10.0 * opts.tolerance ? "coincide" : "distinct";
    return rep;
}

std::vector<Vector> standard_starts(const FunctionSpaceLayout& layout,
                                    const CarrierParams& params, std::uint64_t seed) {
    std::vector<Vector> starts;
    starts.push_back(Vector::Zero(layout.n_reduced));

    const SpMat H1 =
        SpMat(layout.Z.transpose() *
              SpMat(assemble_velocity_form(layout, VelocityForm::Grad) +
                    assemble_velocity_form(layout, VelocityForm::Mass)) *
              layout.Z);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    Vector r(layout.n_reduced);
    for (int i = 0; i < r.size(); ++i) r[i] = gauss(rng);
    r /= std::sqrt(r.dot(H1 * r));
    starts.push_back(std::move(r));

    starts.push_back(Vector(2.0 * solve_linearized(layout, params).v));
    return starts;
}

std::string saint_venant_check(const std::vector<double>& t, const std::vector<double>& z,
                               double m, double c0, double tau1, double t0) {
    if (t.size() != z.size() || t.size() < 3)
        throw ValidationError("saint-venant: need matching grids with at least 3 samples");
    for (size_t k = 1; k < t.size(); ++k)
        if (!(t[k] > t[k - 1])) throw ValidationError("saint-venant: grid not increasing");
    if (!(m > 1.0) || !(c0 > 0.0)) throw ValidationError("saint-venant: need m > 1, c0 > 0");

    double zmax = 0.0;
    for (double v : z) {
        if (v < 0.0) throw ValidationError("saint-venant: series must be nonnegative");
        zmax = std::max(zmax, v);
    }
    if (zmax <= 1e-12) return "trivial";

    const double q = m / (m - 1.0);
    const double from = std::max(tau1, t0);
    std::vector<double> tt, ww;
    for (size_t k = 0; k < t.size(); ++k)
        if (t[k] >= from && t[k] > 0.0) {
            tt.push_back(t[k]);
            ww.push_back(z[k] / std::pow(t[k], q));
        }
    if (tt.size() < 3) throw ValidationError("saint-venant: tail window has too few samples");

    double wmax = 0.0, wmin = ww[0];
    for (double w : ww) {
        wmax = std::max(wmax, w);
        wmin = std::min(wmin, w);
    }
    // trend fit of the normalized tail
    const double n = (double)tt.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t k = 0; k < tt.size(); ++k) {
        sx += tt[k];
        sy += ww[k];
        sxx += tt[k] * tt[k];
        sxy += tt[k] * ww[k];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double icept = (sy - slope * sx) / n;
    const double w_end = icept + slope * tt.back();
    const double w_beg = icept + slope * tt.front();
    const bool bounded_away = wmin > 0.05 * wmax && w_end > 0.25 * std::max(w_beg, 0.0);
    return bounded_away ? "growth" : "inconsistent";
}

FluxBracket phi0_bracket(const FunctionSpaceLayout& layout, CarrierParams params, double lo,
                         double hi, int bisections, const PicardOptions& opts,
                         std::uint64_t seed) {
    if (!(0.0 <= lo && lo < hi)) throw ValidationError("bracket: need 0 <= lo < hi");
    const auto verdict_at = [&](double phi) {
        params.flux = phi;
        params.validate();
        return uniqueness_probe(layout, params, standard_starts(layout, params, seed), opts)
            .verdict;
    };

    FluxBracket br;
    std::string v = verdict_at(lo);
    br.trace.emplace_back(lo, v);
    if (v != "coincide") {
        br.uncertain = lo;
        return br;
    }
    br.coincide = lo;
    v = verdict_at(hi);
    br.trace.emplace_back(hi, v);
    if (v == "coincide") {
        br.coincide = br.uncertain = hi;
        return br;
    }
    br.uncertain = hi;
    for (int k = 0; k < bisections; ++k) {
        const double mid = 0.5 * (br.coincide + br.uncertain);
        v = verdict_at(mid);
        br.trace.emplace_back(mid, v);
        (v == "coincide" ? br.coincide : br.uncertain) = mid;
    }
    return br;
}

std::vector<Vector> random_solenoidal_fields(const FunctionSpaceLayout& layout, int count,
                                             std::uint64_t seed) {
    if (count < 1) throw ValidationError("random_solenoidal_fields: count must be positive");
    auto reduce = [&](const SpMat& A) { return SpMat(layout.Z.transpose() * A * layout.Z); };
    const SpMat K = reduce(assemble_velocity_form(layout, VelocityForm::Grad));
    const SpMat D = reduce(assemble_velocity_form(layout, VelocityForm::DivDiv));
    const double r = 1e6;  // augmented-Lagrangian penalty; 4 rounds leave div ~ 1e-12
    Ldlt ldlt(SpMat(K + r * D));
    if (ldlt.info() != Eigen::Success)
        throw SolverError("random_solenoidal_fields: projection factorization failed");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::vector<Vector> fields;
    fields.reserve(static_cast<size_t>(count));
    for (int s = 0; s < count; ++s) {
        Vector f(layout.n_reduced);
        for (int i = 0; i < f.size(); ++i) f[i] = gauss(rng);
        std::vector<std::array<double, 3>> w(layout.mesh->cells.size(), {0.0, 0.0, 0.0});
        Vector v;
        for (int it = 0; it < 4; ++it) {
            v = ldlt.solve(f - layout.to_reduced_rhs(assemble_div_weighted_load(layout, w)));
            const auto dv = cellwise_divergence(layout, layout.to_full(v));
            for (size_t c = 0; c < w.size(); ++c)
                for (int k = 0; k < 3; ++k) w[c][k] += r * dv[c][k];
        }
        fields.push_back(std::move(v));
    }
    return fields;
}

double smallness_certificate(const CarrierParams& params, const FunctionSpaceLayout& layout,
                             const std::vector<Vector>& fields) {
    if (fields.empty()) throw ValidationError("smallness_certificate: no test fields");
    double worst = 0.0;
    for (const auto& v : fields) worst = std::max(worst, smallness_ratio(params, layout, v));
    return worst;
}

}  // namespace channel
