#include "channel/carrier.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "channel/quadrature.hpp"

namespace channel {

void CarrierParams::validate() const {
    if (!std::isfinite(flux)) throw ValidationError("carrier: flux must be finite");
    const double eps = cutoffs.epsilon;
    if (!(eps > 0.0)) throw ValidationError("carrier: epsilon must be positive");
    // The layer profile lives on 0 <= f2 - x2 <= eps; it has to clear the
    // lower wall at the narrowest section.
    const double narrowest = 2.0 * (1.0 + std::min(geom.amplitude(), 0.0));
    if (!(eps < narrowest))
        throw ValidationError("carrier: epsilon must be below the narrowest channel width");
    if (!(cutoffs.dist > geom.straight_from()))
        throw ValidationError("carrier: transition offset must exceed the bump support");
}

CutoffParams CarrierParams::default_policy(const ChannelGeometry& geom, double h) {
    CutoffParams c;
    // Large layers keep the interior plateau of mu at a mesh-resolvable
    // scale; tiny eps pushes it to exp(-1/eps) and no mesh can see it.
    const double narrowest = 2.0 * (1.0 + std::min(geom.amplitude(), 0.0));
    c.epsilon = std::min(std::clamp(8.0 * h, 0.5, 0.9), 0.9 * narrowest);
    c.dist = std::max(2.0 * geom.straight_from(), 1.0);
    return c;
}

CarrierField::CarrierField(const CarrierParams& params) : params_(params) {
    params_.validate();
}

void CarrierField::check_domain(const Vec2& x) const {
    // Straight-edged cells under a curved wall place quadrature points a
    // whisker outside the exact domain; tolerate that, reject real outliers.
    if (!params_.geom.contains(x, 0.05))
        throw ValidationError("carrier: point outside the channel closure");
}

CarrierField::StreamData CarrierField::stream(const Vec2& x) const {
    check_domain(x);
    const WallData w = params_.geom.eval_walls(x.x);
    const double t = w.f2 - x.y;  // clamped below: above the wall g is constant
    const CutoffEval mu = mu_cutoff(std::max(t, 0.0), params_.cutoffs.epsilon);
    const double phi = params_.flux;
    StreamData s;
    s.G = phi * mu.value;
    s.dG = Vec2{phi * mu.d1 * w.df2, -phi * mu.d1};
    s.d22 = phi * mu.d2;
    s.d12 = -phi * mu.d2 * w.df2;
    s.d11 = phi * (mu.d2 * w.df2 * w.df2 + mu.d1 * w.ddf2);
    return s;
}

Vec2 CarrierField::value_branch(const Vec2& x, int branch) const {
    const StreamData s = stream(x);
    const CutoffEval pi = pi_cutoff(x.x, params_.cutoffs.dist, params_.cutoffs.mollified_pi);
    const double half = 0.5 * params_.flux;
    Vec2 g;
    g.x = s.dG.y * (1.0 - pi.value) + half * pi.value;
    if (branch == 0)
        g.y = -s.dG.x;
    else
        g.y = pi.d1 * (s.G - half * (x.y + 1.0));
    return g;
}

Mat2 CarrierField::grad_branch(const Vec2& x, int branch) const {
    const StreamData s = stream(x);
    const CutoffEval pi = pi_cutoff(x.x, params_.cutoffs.dist, params_.cutoffs.mollified_pi);
    const double half = 0.5 * params_.flux;
    Mat2 dg;
    dg.m[0][0] = s.d12 * (1.0 - pi.value) + (half - s.dG.y) * pi.d1;
    dg.m[0][1] = s.d22 * (1.0 - pi.value);
    if (branch == 0) {
        dg.m[1][0] = -s.d11;
        dg.m[1][1] = -s.d12;
    } else {
        dg.m[1][0] = pi.d2 * (s.G - half * (x.y + 1.0)) + pi.d1 * s.dG.x;
        dg.m[1][1] = pi.d1 * (s.dG.y - half);
    }
    return dg;
}

Vec2 CarrierField::value(const Vec2& x) const {
    return value_branch(x, std::abs(x.x) < params_.cutoffs.dist ? 0 : 1);
}

Mat2 CarrierField::grad(const Vec2& x) const {
    return grad_branch(x, std::abs(x.x) < params_.cutoffs.dist ? 0 : 1);
}

FlowField CarrierField::flow() const {
    return FlowField{[*this](const Vec2& x) { return value(x); },
                     [*this](const Vec2& x) { return grad(x); }};
}

// ---------------------------------------------------------------------------
// Layer-graded quadrature. The profile mu lives at wildly separated scales
// in t = f2 - x2: a plateau of width p ~ eps * exp(-1/eps), a 1/t stretch up
// to ~eps, then nothing. Panels follow the breakpoints; the 1/t stretch is
// split geometrically.

namespace {

// Panels in t across a column of height H (t = 0 at the upper wall).
std::vector<std::pair<double, double>> column_panels(double eps, double H) {
    const double r = kMuRounding;
    const double p = mu_plateau(eps);
    const double t1 = p * (1.0 + 2.0 * r);
    const double t2 = eps * (1.0 - 2.0 * r);
    std::vector<double> bp = {0.0, p, t1};
    const int nlog = 16;
    for (int i = 1; i < nlog; ++i) bp.push_back(t1 * std::pow(t2 / t1, double(i) / nlog));
    bp.push_back(t2);
    bp.push_back(eps);
    double t = eps;
    while (t < H - 1e-14) {
        t = std::min(t + 0.5, H);
        bp.push_back(t);
    }
    // Floor at the scale where x2 = f2 - t is still exactly representable;
    // below it mu sits on its plateau (mu' = 0), so nothing is lost there.
    const double tf = 1e-13;
    for (double& b : bp) b = std::max(b, tf);
    std::sort(bp.begin(), bp.end());
    std::vector<std::pair<double, double>> panels;
    for (size_t i = 0; i + 1 < bp.size(); ++i)
        if (bp[i + 1] > bp[i] * (1.0 + 1e-15)) panels.push_back({bp[i], bp[i + 1]});
    return panels;
}

double column_integral(const CarrierParams& params, double x1,
                       const std::function<double(const Vec2&)>& f) {
    const WallData w = params.geom.eval_walls(x1);
    const double H = w.f2 - w.f1;
    const auto& gl = gauss_legendre(12);
    double sum = 0.0;
    for (const auto& [ta, tb] : column_panels(params.cutoffs.epsilon, H)) {
        const double mid = 0.5 * (ta + tb), hw = 0.5 * (tb - ta);
        for (const auto& q : gl) {
            const double t = mid + hw * q.x;
            sum += hw * q.w * f(Vec2{x1, w.f2 - t});
        }
    }
    return sum;
}

std::vector<double> x1_breakpoints(const CarrierParams& params, double x_max) {
    const double L = params.geom.straight_from();
    const double d = params.cutoffs.dist;
    std::vector<double> bp;
    for (double b : {0.0, L, d, 1.25 * d, 1.5 * d, 1.75 * d, x_max})
        if (b < x_max - 1e-14 || b == x_max) {
            bp.push_back(b);
            if (b > 0.0) bp.push_back(-b);
        }
    bp.push_back(-x_max);
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    // Split long panels so the bump profile is well sampled.
    std::vector<double> out;
    for (size_t i = 0; i + 1 < bp.size(); ++i) {
        const int n = std::max(1, int(std::ceil((bp[i + 1] - bp[i]) / 0.5)));
        for (int k = 0; k < n; ++k) out.push_back(bp[i] + (bp[i + 1] - bp[i]) * k / n);
    }
    out.push_back(bp.back());
    return out;
}

}  // namespace

double integrate_layer_aware(const CarrierParams& params, double x_max,
                             const std::function<double(const Vec2&)>& f) {
    const auto bp = x1_breakpoints(params, x_max);
    const auto& gl = gauss_legendre(10);
    double sum = 0.0;
    for (size_t i = 0; i + 1 < bp.size(); ++i) {
        const double mid = 0.5 * (bp[i] + bp[i + 1]), hw = 0.5 * (bp[i + 1] - bp[i]);
        for (const auto& q : gl)
            sum += hw * q.w * column_integral(params, mid + hw * q.x, f);
    }
    return sum;
}

double CarrierField::station_flux(double x1) const {
    return column_integral(params_, x1, [&](const Vec2& x) { return value(x).x; });
}

double CarrierField::energy() const {
    const double x_max = 1.75 * params_.cutoffs.dist;
    return integrate_layer_aware(params_, x_max, [&](const Vec2& x) {
        const Mat2 dg = grad(x);
        const Vec2 conv = dg.apply(value(x));
        return dg.frobenius2() + conv.dot(conv);
    });
}

// ---------------------------------------------------------------------------

std::vector<CarrierCheckRow> CarrierReport::rows() const {
    double worst_flux = 0.0;
    for (const auto& [s, e] : flux_errors) worst_flux = std::max(worst_flux, e);
    return {
        {"div_residual", max_div, 1e-10, max_div <= 1e-10},
        {"wall_normal_flux", max_normal_flux, 1e-12, max_normal_flux <= 1e-12},
        {"wall_slip_stress", max_slip_stress, 1e-12, max_slip_stress <= 1e-12},
        {"station_flux_error", worst_flux, 1e-9, worst_flux <= 1e-9},
        {"far_field_error", far_field_error, 1e-13, far_field_error <= 1e-13},
        {"seam_jump", max_seam_jump, 1e-12, max_seam_jump <= 1e-12},
    };
}

bool CarrierReport::all_pass() const {
    for (const auto& r : rows())
        if (!r.pass) return false;
    return true;
}

CarrierReport verify_carrier(const CarrierParams& params, const SamplingSpec& sampling) {
    params.validate();
    const CarrierField g(params);
    const ChannelGeometry& geom = params.geom;
    const double d = params.cutoffs.dist;
    const double eps = params.cutoffs.epsilon;
    const double x_max = 2.0 * d;
    const double phi_scale = std::max(1.0, std::abs(params.flux));
    CarrierReport rep;

    // Divergence of the analytic gradient, scaled by the size of the terms
    // that cancel (the layer derivatives reach exp(1/eps) for small eps, so
    // an absolute residual would just measure roundoff times that scale).
    for (int i = 0; i < sampling.n_x1; ++i) {
        const double x1 = -x_max + 2.0 * x_max * (i + 0.5) / sampling.n_x1;
        const WallData w = geom.eval_walls(x1);
        for (int j = 0; j < sampling.n_x2; ++j) {
            double t;
            if (j % 2 == 0) {
                t = (w.f2 - w.f1) * (j + 0.5) / sampling.n_x2;
            } else {
                t = eps * std::pow(1e-12, double(j) / sampling.n_x2);
            }
            const Vec2 x{x1, w.f2 - t};
            const Mat2 dg = g.grad(x);
            const double scale = std::max({1.0, std::abs(dg.m[0][0]), std::abs(dg.m[1][1])});
            rep.max_div = std::max(rep.max_div, std::abs(dg.trace()) / scale);
        }
    }

    // Wall conditions: impermeability and zero tangential rate of strain.
    for (int i = 0; i <= 200; ++i) {
        const double x1 = -x_max + 2.0 * x_max * i / 200.0;
        const WallData w = geom.eval_walls(x1);
        for (int side = 0; side < 2; ++side) {
            const Vec2 x{x1, side ? w.f2 : w.f1};
            const Vec2 n = side ? geom.upper_normal(x1) : geom.lower_normal(x1);
            const Vec2 tau{-n.y, n.x};
            const Vec2 val = g.value(x);
            const Mat2 dg = g.grad(x);
            double ndt = 0.0;
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    ndt += (a == 0 ? n.x : n.y) * 0.5 * (dg.m[a][b] + dg.m[b][a]) *
                           (b == 0 ? tau.x : tau.y);
            rep.max_normal_flux = std::max(rep.max_normal_flux, std::abs(val.dot(n)) / phi_scale);
            rep.max_slip_stress = std::max(rep.max_slip_stress, std::abs(ndt) / phi_scale);
        }
    }

    // Cross-section flux at stations across the whole verification window.
    for (int i = 0; i <= 20; ++i) {
        const double x1 = -x_max + 2.0 * x_max * i / 20.0;
        rep.flux_errors.push_back({x1, std::abs(g.station_flux(x1) - params.flux) / phi_scale});
    }

    // Poiseuille-free tail: g should equal (flux/2, 0) beyond 7d/4.
    for (int i = 0; i <= 40; ++i) {
        const double x1 = 1.75 * d + 0.25 * d * i / 40.0;
        for (int s = -1; s <= 1; s += 2)
            for (int j = 1; j < 8; ++j) {
                const Vec2 x{s * x1, -1.0 + 2.0 * j / 8.0};
                const Vec2 diff = g.value(x) - Vec2{0.5 * params.flux, 0.0};
                rep.far_field_error =
                    std::max(rep.far_field_error, diff.norm() / phi_scale);
            }
    }

    // Both g2 rules must agree (to machine precision) on the seam |x1| = d.
    for (int s = -1; s <= 1; s += 2) {
        const WallData w = geom.eval_walls(s * d);
        for (int j = 0; j <= 32; ++j) {
            const Vec2 x{s * d, w.f1 + (w.f2 - w.f1) * j / 32.0};
            const Vec2 dv = g.value_branch(x, 0) - g.value_branch(x, 1);
            const Mat2 a = g.grad_branch(x, 0), b = g.grad_branch(x, 1);
            double dgnorm = 0.0;
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c)
                    dgnorm = std::max(dgnorm, std::abs(a.m[r][c] - b.m[r][c]));
            rep.max_seam_jump =
                std::max({rep.max_seam_jump, dv.norm() / phi_scale, dgnorm / phi_scale});
        }
    }

    rep.energy = g.energy();

    // Sharpness of the layer bound -mu'(t) t <= eps.
    for (int i = 1; i < 20000; ++i) {
        const double t = eps * double(i) / 20000.0;
        rep.mu_bound_factor =
            std::max(rep.mu_bound_factor, -mu_cutoff(t, eps).d1 * t / eps);
    }
    rep.resolution_warning = mu_plateau(eps) < 1e-3;
    return rep;
}

// ---------------------------------------------------------------------------

double hardy_ratio(const CarrierParams& params, const ScalarField& w, double half_length) {
    params.validate();
    const double eps = params.cutoffs.epsilon;
    const ChannelGeometry& geom = params.geom;

    // w must vanish on the upper wall for the layer inequality to apply.
    double wall_scale = 0.0, wall_val = 0.0;
    for (int i = 0; i <= 50; ++i) {
        const double x1 = -half_length + 2.0 * half_length * i / 50.0;
        const WallData wd = geom.eval_walls(x1);
        wall_val = std::max(wall_val, std::abs(w.value(Vec2{x1, wd.f2})));
        wall_scale = std::max(wall_scale, std::abs(w.value(Vec2{x1, 0.5 * (wd.f1 + wd.f2)})));
    }
    if (wall_val > 1e-8 * std::max(wall_scale, 1e-30))
        throw ValidationError("hardy_ratio: test field does not vanish on the upper wall");

    // Flux-independent form: d2 G = -flux * mu'(f2 - x2), so the flux cancels
    // between numerator and denominator scaling.
    const double num = integrate_layer_aware(params, half_length, [&](const Vec2& x) {
        const double t = geom.eval_walls(x.x).f2 - x.y;
        const double m1 = mu_cutoff(std::max(t, 0.0), eps).d1;
        const double wv = w.value(x);
        return wv * wv * m1 * m1;
    });
    const double den = integrate_layer_aware(params, half_length, [&](const Vec2& x) {
        const double d2 = w.d2(x);
        return d2 * d2;
    });
    if (!(den > 0.0)) throw ValidationError("hardy_ratio: degenerate test field");
    return num / (eps * eps * den);
}

// ---------------------------------------------------------------------------

namespace {

// Uniform barycentric refinement of a triangle, 4^levels children.
void subdivide_tri(const std::array<Vec2, 3>& t, int levels,
                   std::vector<std::array<Vec2, 3>>& out) {
    if (levels == 0) {
        out.push_back(t);
        return;
    }
    const Vec2 m01 = 0.5 * (t[0] + t[1]), m12 = 0.5 * (t[1] + t[2]), m20 = 0.5 * (t[2] + t[0]);
    subdivide_tri({t[0], m01, m20}, levels - 1, out);
    subdivide_tri({m01, t[1], m12}, levels - 1, out);
    subdivide_tri({m12, m20, t[2]}, levels - 1, out);
    subdivide_tri({m01, m12, m20}, levels - 1, out);
}

}  // namespace

double smallness_ratio(const CarrierParams& params, const FunctionSpaceLayout& layout,
                       const Vector& v_reduced) {
    params.validate();
    const TruncatedMesh& mesh = *layout.mesh;
    const double eps = params.cutoffs.epsilon;
    const double d = params.cutoffs.dist;
    const double half = 0.5 * params.flux;
    const Vector full = layout.to_full(v_reduced);
    const auto rule = triangle_rule(6);

    double numerator = 0.0, grad_sq = 0.0;
    for (int c = 0; c < int(mesh.cells.size()); ++c) {
        const auto& cell = mesh.cells[c];
        const std::array<Vec2, 3> corners = {mesh.nodes[cell[0]], mesh.nodes[cell[1]],
                                             mesh.nodes[cell[2]]};
        const auto vn = layout.cell_vnodes(c);
        const CellGeom parent = CellGeom::make(corners);

        // Refine cells touching the layer so the 1/t profile is sampled.
        double tmin = 1e300;
        for (const auto& p : corners)
            tmin = std::min(tmin, params.geom.eval_walls(p.x).f2 - p.y);
        const int levels = tmin < 2.0 * eps ? 3 : 0;
        std::vector<std::array<Vec2, 3>> tris;
        subdivide_tri(corners, levels, tris);

        for (const auto& tri : tris) {
            const CellGeom sub = CellGeom::make(tri);
            for (const auto& q : rule) {
                const Vec2 x = sub.point(q.l1, q.l2, q.l3);
                // Barycentric coordinates of x in the parent cell.
                const Vec2 rel = x - parent.p[0];
                double l[3];
                l[1] = parent.grad_l[1].dot(rel);
                l[2] = parent.grad_l[2].dot(rel);
                l[0] = 1.0 - l[1] - l[2];
                const P2Shape sh = parent.p2(l[0], l[1], l[2]);

                Vec2 v{0.0, 0.0};
                Mat2 dv{};
                for (int a = 0; a < 6; ++a) {
                    const double vx = full[2 * vn[a]], vy = full[2 * vn[a] + 1];
                    v.x += vx * sh.N[a];
                    v.y += vy * sh.N[a];
                    dv.m[0][0] += vx * sh.dN[a].x;
                    dv.m[0][1] += vx * sh.dN[a].y;
                    dv.m[1][0] += vy * sh.dN[a].x;
                    dv.m[1][1] += vy * sh.dN[a].y;
                }

                const WallData wd = params.geom.eval_walls(x.x);
                const double t = std::max(wd.f2 - x.y, 0.0);
                const CutoffEval mu = mu_cutoff(t, eps);
                const double d2G = -params.flux * mu.d1;
                const double G = params.flux * mu.value;
                const CutoffEval pi = pi_cutoff(x.x, d, params.cutoffs.mollified_pi);
                const double shear = v.y - wd.df2 * v.x;

                // Integrated-by-parts form of int v . grad g . v: every term
                // carries at most one mu' (integrable, ~eps/t), so small eps
                // is numerically benign, unlike the raw integrand.
                double val = -(1.0 - pi.value) * dv.m[0][1] * shear * d2G;
                val += -0.5 * pi.d1 * v.x * v.x * d2G;
                val += half * v.x * v.x * pi.d1;
                if (std::abs(x.x) < d) {
                    val += dv.m[1][0] * shear * d2G;
                } else {
                    const double q2 = G - half * (x.y + 1.0);
                    val += v.x * v.y * pi.d2 * q2;
                    val += v.y * v.y * pi.d1 * (d2G - half);
                }
                const double wq = q.w * sub.area;
                numerator += wq * val;
                grad_sq += wq * dv.frobenius2();
            }
        }
    }
    if (!(grad_sq > 0.0)) throw ValidationError("smallness_ratio: zero velocity field");
    return std::abs(numerator) / grad_sq;
}

}  // namespace channel
