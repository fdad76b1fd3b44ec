// Acceptance battery: one pass/fail line per criterion, nonzero exit if any
// criterion fails. Tolerances are pinned here, not configurable.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>

#include "channel/analysis.hpp"
#include "channel/cutoffs.hpp"

using namespace channel;

namespace {

int g_failures = 0;

struct Check {
    std::ostringstream detail;
    bool ok = true;

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            detail << (detail.str().empty() ? "" : "; ") << what;
        }
    }
};

void criterion(int id, const std::string& name, const std::function<void(Check&)>& body) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.ok = false;
        c.detail << "exception: " << e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2d %-24s %s  (%.1f s)%s%s\n", id, name.c_str(),
                c.ok ? "PASS" : "FAIL", secs, c.ok ? "" : "  -- ",
                c.ok ? "" : c.detail.str().c_str());
    std::fflush(stdout);
    if (!c.ok) ++g_failures;
}

CarrierParams params_for(const ChannelGeometry& geom, double flux, double eps, double dist) {
    CarrierParams p;
    p.flux = flux;
    p.cutoffs.epsilon = eps;
    p.cutoffs.dist = dist;
    p.geom = geom;
    return p;
}

void carrier_exactness(Check& c) {
    for (const bool bumped : {false, true}) {
        const auto geom = bumped ? ChannelGeometry::bump(0.2, 3.0) : ChannelGeometry::straight();
        const double L = geom.straight_from();
        const auto p = params_for(geom, 1.0, 0.1, 2.0 * L);
        const std::string tag = bumped ? " (bump)" : " (straight)";
        const auto rep = verify_carrier(p);
        c.expect(rep.max_div <= 1e-10, "div residual" + tag);
        c.expect(rep.max_normal_flux <= 1e-10, "wall-normal flux" + tag);
        c.expect(rep.max_slip_stress <= 1e-10, "slip stress" + tag);
        for (const auto& [station, err] : rep.flux_errors)
            c.expect(err <= 1e-10, "station flux at " + std::to_string(station) + tag);
        // exact far field, not just small
        const CarrierField g(p);
        for (double x1 : {1.7501 * 2.0 * L, -2.0 * 2.0 * L})
            for (double x2 : {-0.9, 0.0, 0.99}) {
                const Vec2 v = g.value(Vec2{x1, x2});
                c.expect(v.x == 0.5 && v.y == 0.0, "far field not exact" + tag);
            }
    }
}

void cutoff_bounds(Check& c) {
    const int n = 10000;
    for (double eps : {0.1, 0.5, 0.9}) {
        double worst = 0.0;
        for (int i = 1; i <= n; ++i) {
            const double t = eps * i / n;
            worst = std::max(worst, -mu_cutoff(t, eps).d1 * t);
        }
        c.expect(worst <= 1.05 * eps, "-mu' t exceeds 1.05 eps at eps " + std::to_string(eps));
    }
    for (double d : {1.0, 3.0}) {
        double lo1 = 0.0, hi1 = 0.0, hi2 = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double t = 2.0 * d * i / n;
            const CutoffEval pi = pi_cutoff(t, d);
            lo1 = std::min(lo1, pi.d1);
            hi1 = std::max(hi1, pi.d1);
            hi2 = std::max(hi2, std::abs(pi.d2));
        }
        c.expect(lo1 >= -1e-12, "pi' negative at d " + std::to_string(d));
        c.expect(hi1 <= 4.0 / d * (1.0 + 1e-12), "pi' above 4/d at d " + std::to_string(d));
        c.expect(hi2 <= 16.0 / (d * d) * (1.0 + 1e-12),
                 "|pi''| above 16/d^2 at d " + std::to_string(d));
    }
}

void korn_anchor(Check& c) {
    const auto straight_mesh = build_mesh(ChannelGeometry::straight(), 8.0, 0.25);
    const auto straight = build_spaces(straight_mesh);
    const double c_straight = korn_constant(straight).value;
    c.expect(std::abs(c_straight - 1.0) <= 1e-6,
             "straight constant " + std::to_string(c_straight));

    const auto geom = ChannelGeometry::bump(0.2, 1.0);
    const auto mesh_h = build_mesh(geom, 8.0, 0.25);
    const auto lay_h = build_spaces(mesh_h);
    const auto mesh_h2 = build_mesh(geom, 8.0, 0.125);
    const auto lay_h2 = build_spaces(mesh_h2);
    const double c1 = korn_constant(lay_h).value;
    const double c2 = korn_constant(lay_h2).value;
    c.expect(c1 > 0.0 && c1 <= 1.0 + 1e-9, "bump constant out of (0, 1]");
    c.expect(std::abs(c1 - c2) / c2 <= 0.02,
             "mesh drift " + std::to_string(std::abs(c1 - c2) / c2));
}

void smallness_certification(Check& c) {
    // T = 16 keeps the doubled transition (7d/4 = 14 at d = 8) inside the mesh
    const auto geom = ChannelGeometry::bump(0.2, 1.0);
    const auto mesh = build_mesh(geom, 16.0, 0.25);
    const auto layout = build_spaces(mesh);
    const double korn = korn_constant(layout).value;
    const auto fields = random_solenoidal_fields(layout, 50, 7);

    auto cert = [&](double eps, double dist) {
        return smallness_certificate(params_for(geom, 1.0, eps, dist), layout, fields);
    };
    const double r_04_4 = cert(0.4, 4.0);
    const double r_02_4 = cert(0.2, 4.0);
    const double r_01_4 = cert(0.1, 4.0);
    const double best = std::min({r_04_4, r_02_4, r_01_4});
    c.expect(best <= korn / 2.0, "no grid point below c/2 = " + std::to_string(korn / 2.0) +
                                     " (best " + std::to_string(best) + ")");
    const double refined = cert(0.1, 8.0);
    c.expect(refined < r_02_4, "ratio did not shrink under (eps/2, 2d): " +
                                   std::to_string(refined) + " vs " + std::to_string(r_02_4));
}

void hardy_scaling(Check& c) {
    const auto geom = ChannelGeometry::straight();
    auto p = params_for(geom, 1.0, 0.1, 2.0);
    // fractional wall vanishing keeps the eps^2-normalized quotient in band
    const ScalarField w{
        [&](const Vec2& x) { return std::pow(geom.eval_walls(x.x).f2 - x.y, 0.55); },
        [&](const Vec2& x) { return -0.55 * std::pow(geom.eval_walls(x.x).f2 - x.y, -0.45); },
    };
    double lo = 1e300, hi = 0.0;
    for (double eps : {0.2, 0.1, 0.05}) {
        p.cutoffs.epsilon = eps;
        const double r = hardy_ratio(p, w, 4.0);
        c.expect(r > 0.0, "nonpositive ratio");
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    c.expect(hi / lo < 2.0, "band factor " + std::to_string(hi / lo));
}

void mms_orders(Check& c) {
    const MmsResult res = mms_convergence(3, 0.5, 4.0);
    c.expect(std::abs(res.vel_order - 2.0) <= 0.3,
             "H1 velocity order " + std::to_string(res.vel_order));
    c.expect(std::abs(res.pressure_order - 2.0) <= 0.5,
             "L2 pressure order " + std::to_string(res.pressure_order));
}

void existence_pipeline(Check& c) {
    const auto geom = ChannelGeometry::bump(0.2, 1.0);
    const auto mesh = build_mesh(geom, 10.0, 0.25);
    const auto layout = build_spaces(mesh);
    const double M1 = poincare_constant(layout).value;
    const double korn = korn_constant(layout).value;
    const double bound = 2.0 * (1.0 + M1 * M1) / korn;

    for (double flux : {0.1, 0.25, 0.5}) {
        auto p = params_for(geom, flux, 0.0, 0.0);
        p.cutoffs = CarrierParams::default_policy(geom, 0.25);
        const std::string tag = " at flux " + std::to_string(flux);
        const auto sol = picard_solve(layout, p);
        c.expect(sol.converged, "no convergence" + tag);
        c.expect(sol.history.back().residual <= 1e-8, "final residual" + tag);
        // geometric decay of the increments down to roundoff scale
        for (size_t k = 1; k + 1 < sol.history.size(); ++k) {
            const double a = sol.history[k].increment, b = sol.history[k + 1].increment;
            if (a > 1e-13) c.expect(b < a, "increment not decreasing" + tag);
        }
        const FieldNorms norms = velocity_norms(layout, sol.full_velocity());
        const double vh1 = std::hypot(norms.l2, norms.h1_semi);
        const double eg = CarrierField(p).energy();
        c.expect(vh1 / std::sqrt(eg) <= bound,
                 "a-priori quotient " + std::to_string(vh1 / std::sqrt(eg)) + " above " +
                     std::to_string(bound) + tag);
    }
}

void exponential_decay(Check& c) {
    const auto geom = ChannelGeometry::bump(0.2, 1.0);
    const double T = 12.0, h = 0.25;
    const auto mesh = build_mesh(geom, T, h);
    const auto layout = build_spaces(mesh);
    auto p = params_for(geom, 0.5, 0.0, 0.0);
    p.cutoffs = CarrierParams::default_policy(geom, h);
    p.cutoffs.dist = 2.0 * geom.straight_from();
    const auto sol = picard_solve(layout, p);

    std::vector<double> t_grid;
    for (double t = 1.0; t <= T + 1e-12; t += 0.25) t_grid.push_back(std::min(t, T));
    const auto rep = decay_profile(sol, t_grid);
    c.expect(rep.fit_window[0] == 5.0 && rep.fit_window[1] == 11.0, "fit window not [5, 11]");
    c.expect(rep.fitted_rate > 0.0, "slope not negative");
    c.expect(rep.r_squared >= 0.99, "r^2 " + std::to_string(rep.r_squared));
    for (size_t k = 0; k + 1 < rep.y_plus.size(); ++k)
        c.expect(rep.y_plus[k + 1] <= rep.y_plus[k] + 1e-14, "y+ increases");

    // -(y+)' equals the plateau-edge energy: y+ is piecewise quintic in t
    // (pieces break at quarter-grid points), so Richardson-extrapolate the
    // five-point stencil once and evaluate inside one piece
    const Vector full = sol.full_velocity();
    auto yplus = [&](double t) {
        const double tail = grad_norm_slab(layout, full, t, T);
        return weighted_grad2(layout, full, t - 1.0, t, 0.0, 1.0) + tail * tail;
    };
    auto stencil = [&](double t, double d) {
        return (yplus(t - 2 * d) - 8 * yplus(t - d) + 8 * yplus(t + d) - yplus(t + 2 * d)) /
               (12 * d);
    };
    const double t0 = 3.09375, d1 = h / 16.0;  // piece midpoint at this h
    const double fd = (16.0 * stencil(t0, 0.5 * d1) - stencil(t0, d1)) / 15.0;
    const double exact = weighted_grad2(layout, full, t0 - 1.0, t0, 1.0, 1.0);
    c.expect(std::abs(fd + exact) <= 1e-8 * exact,
             "-(y+)' mismatch " + std::to_string(std::abs(fd + exact) / exact));
}

void growth_bound(Check& c) {
    const auto geom = ChannelGeometry::bump(0.2, 1.0);
    const double T = 8.0;
    const auto mesh = build_mesh(geom, T, 0.5);
    const auto layout = build_spaces(mesh);
    std::vector<double> t_grid;
    for (double t = 1.5; t <= T + 1e-12; t += 0.5) t_grid.push_back(std::min(t, T));

    auto c6 = [&](double flux, bool& interior) {
        auto p = params_for(geom, flux, 0.0, 0.0);
        p.cutoffs = CarrierParams::default_policy(geom, 0.5);
        const auto sol = picard_solve(layout, p);
        const auto rep = growth_profile(sol, t_grid);
        size_t arg = 0;
        double best = -1.0;
        for (size_t k = 0; k < rep.t_grid.size(); ++k) {
            const double q = rep.cumulative[k] / (1.0 + std::sqrt(rep.t_grid[k]));
            if (q > best) best = q, arg = k;
        }
        interior = rep.t_grid[arg] < T - 0.25;
        return rep.C6_empirical;
    };
    bool in_half = false, in_quarter = false;
    const double c_half = c6(0.5, in_half);
    const double c_quarter = c6(0.25, in_quarter);
    c.expect(std::isfinite(c_half) && c_half > 0.0, "constant not finite");
    c.expect(in_half && in_quarter, "sup not attained in the interior");
    const double ratio = c_half / c_quarter;
    c.expect(ratio >= 1.7 && ratio <= 2.3, "flux ratio " + std::to_string(ratio));
}

void uniqueness(Check& c) {
    const auto geom = ChannelGeometry::bump(0.2, 1.0);
    const auto mesh = build_mesh(geom, 10.0, 0.25);
    const auto layout = build_spaces(mesh);
    auto p = params_for(geom, 0.25, 0.0, 0.0);
    p.cutoffs = CarrierParams::default_policy(geom, 0.25);

    const auto starts = standard_starts(layout, p, 3);
    const auto rep = uniqueness_probe(layout, p, starts);
    c.expect(rep.verdict == "coincide", "verdict " + rep.verdict);
    c.expect(rep.max_distance <= 1e-6, "max distance " + std::to_string(rep.max_distance));
    const std::string branch =
        saint_venant_check(rep.t_grid, rep.y_diff, 1.5, 1.0, 2.0 * p.cutoffs.dist + 1.0, 2.0);
    c.expect(branch == "trivial", "difference growth classified " + branch);
}

void bogovskii(Check& c) {
    const auto mesh = build_mesh(ChannelGeometry::straight(), 0.5, 0.125);
    const auto layout = build_spaces(mesh, SpaceKind::FullDirichlet);
    const double pi = 3.14159265358979323846;
    const std::vector<std::function<double(const Vec2&)>> battery = {
        [](const Vec2& x) { return x.x; },
        [](const Vec2& x) { return x.y; },
        [](const Vec2& x) { return x.x * x.y; },
        [&](const Vec2& x) { return std::sin(pi * x.x); },
        [&](const Vec2& x) { return std::sin(pi * x.y); },
    };
    // mean-subtract numerically against the slab area
    for (size_t i = 0; i < battery.size(); ++i) {
        const auto& f = battery[i];
        double mean = 0.0, area = 0.0;
        for (size_t cell = 0; cell < mesh.cells.size(); ++cell) {
            const Vec2 x = mesh.centroid(static_cast<int>(cell));
            const double a = mesh.cell_area(static_cast<int>(cell));
            mean += a * f(x);
            area += a;
        }
        mean /= area;
        const auto res =
            bogovskii_bound(layout, [&, mean](const Vec2& x) { return f(x) - mean; });
        c.expect(res.residual <= 1e-8,
                 "battery " + std::to_string(i) + " residual " + std::to_string(res.residual));
        c.expect(std::isfinite(res.ratio) && res.ratio > 0.0,
                 "battery " + std::to_string(i) + " ratio not finite");
    }
    bool rejected = false;
    try {
        bogovskii_bound(layout, [](const Vec2&) { return 1.0; });
    } catch (const ValidationError&) {
        rejected = true;
    }
    c.expect(rejected, "nonzero-mean input not rejected");
}

}  // namespace

int main() {
    criterion(1, "carrier-exactness", carrier_exactness);
    criterion(2, "cutoff-bounds", cutoff_bounds);
    criterion(3, "korn-anchor", korn_anchor);
    criterion(4, "smallness-certificate", smallness_certification);
    criterion(5, "hardy-scaling", hardy_scaling);
    criterion(6, "mms-convergence", mms_orders);
    criterion(7, "existence-pipeline", existence_pipeline);
    criterion(8, "exponential-decay", exponential_decay);
    criterion(9, "growth-bound", growth_bound);
    criterion(10, "uniqueness-probe", uniqueness);
    criterion(11, "bogovskii-solve", bogovskii);

    if (g_failures) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
