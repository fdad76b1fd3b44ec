#include "channel/solver.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>

namespace channel {

namespace {

std::function<int(int)> layer_sublevels(const FunctionSpaceLayout& layout,
                                        const CarrierParams& params) {
    const TruncatedMesh* mesh = layout.mesh;
    const ChannelGeometry geom = params.geom;
    const double eps = params.cutoffs.epsilon;
    return [mesh, geom, eps](int c) {
        double tmin = 1e300;
        for (int k = 0; k < 3; ++k) {
            const Vec2 p = mesh->nodes[mesh->cells[c][k]];
            tmin = std::min(tmin, geom.eval_walls(p.x).f2 - p.y);
        }
        return tmin < 2.0 * eps ? 2 : 0;
    };
}

struct DualNorms {
    Eigen::SimplicialLDLT<SpMat> K;
    Eigen::SimplicialLDLT<SpMat> Mp;
    double f_dual = 0.0;

    DualNorms(const PerturbationSystem& sys, const FunctionSpaceLayout& layout) {
        K.compute(sys.K_red);
        if (K.info() != Eigen::Success)
            throw SolverError("solver: gradient form is not positive definite");
        Mp.compute(assemble_pressure_mass(layout));
        if (Mp.info() != Eigen::Success)
            throw SolverError("solver: pressure mass factorization failed");
        f_dual = std::sqrt(std::max(sys.f_red.dot(Vector(K.solve(sys.f_red))), 0.0));
    }

    double residual(const PerturbationSystem& sys, const FunctionSpaceLayout& layout,
                    const Vector& v, const Vector& p) const {
        const Vector inertia =
            layout.to_reduced_rhs(assemble_inertia_load(layout, layout.to_full(v)));
        const Vector rv = sys.f_red - sys.A_red * v - inertia + sys.B_red.transpose() * p;
        Vector rp = -(sys.B_red * v);
        // The pressure test space is mean-zero, so take the dual norm modulo
        // constants: the gauge vector is exactly Mp * ones, making the
        // projection a plain mean shift. (On curved walls the trace of v.n
        // only vanishes nodally, so B v picks up a uniform-divergence mode
        // compensated by the multiplier.)
        rp -= (rp.sum() / sys.gauge.sum()) * sys.gauge;
        const double dual2 = rv.dot(Vector(K.solve(rv))) + rp.dot(Vector(Mp.solve(rp)));
        // absolute residual when there is no forcing (then v = 0 is exact)
        return std::sqrt(std::max(dual2, 0.0)) / (f_dual > 0.0 ? f_dual : 1.0);
    }
};

}  // namespace

PerturbationSystem build_perturbation_system(const FunctionSpaceLayout& layout,
                                             const CarrierParams& params,
                                             const std::function<Vec2(const Vec2&)>* body_force,
                                             int quad_degree) {
    const CarrierField g(params);
    const FlowField gf = g.flow();
    const auto sublevels = layer_sublevels(layout, params);

    PerturbationSystem sys;
    sys.layout = &layout;
    const SpMat& Z = layout.Z;
    const SpMat V = assemble_velocity_form(layout, VelocityForm::Viscous, nullptr, quad_degree);
    const SpMat C = assemble_velocity_form(layout, VelocityForm::Convection, &gf, quad_degree);
    const SpMat R = assemble_velocity_form(layout, VelocityForm::Reaction, &gf, quad_degree);
    sys.A_red = Z.transpose() * SpMat(V + C + R) * Z;
    sys.K_red = Z.transpose() *
                assemble_velocity_form(layout, VelocityForm::Grad, nullptr, quad_degree) * Z;
    sys.B_red = assemble_divergence(layout) * Z;
    Vector f = assemble_carrier_load(layout, gf, quad_degree, sublevels);
    if (body_force) f += assemble_load(layout, *body_force, quad_degree);
    sys.f_red = layout.to_reduced_rhs(f);
    sys.gauge = pressure_integrals(layout);
    return sys;
}

double weak_residual(const PerturbationSystem& sys, const Vector& v, const Vector& p) {
    DualNorms duals(sys, *sys.layout);
    return duals.residual(sys, *sys.layout, v, p);
}

SolutionBundle solve_linearized(const FunctionSpaceLayout& layout, const CarrierParams& params,
                                int quad_degree) {
    const PerturbationSystem sys = build_perturbation_system(layout, params, nullptr, quad_degree);
    const SaddleSolver saddle(layout, sys.A_red, sys.B_red, sys.gauge);
    const auto r = saddle.solve(sys.f_red);
    SolutionBundle sol;
    sol.params = params;
    sol.layout = &layout;
    sol.v = r.v;
    sol.p = r.p;
    DualNorms duals(sys, layout);
    const double res = duals.residual(sys, layout, sol.v, sol.p);
    sol.history.push_back({0, res, std::sqrt(std::max(r.v.dot(sys.K_red * r.v), 0.0)), 1.0});
    sol.converged = true;  // linear problem: one solve
    return sol;
}

SolutionBundle picard_solve(const FunctionSpaceLayout& layout, const CarrierParams& params,
                            const PicardOptions& options,
                            const std::function<Vec2(const Vec2&)>* body_force,
                            const Vector* initial) {
    PerturbationSystem sys =
        build_perturbation_system(layout, params, body_force, options.quad_degree);
    DualNorms duals(sys, layout);

    SolutionBundle sol;
    sol.params = params;
    sol.layout = &layout;
    sol.v = initial ? *initial : Vector::Zero(layout.n_reduced);
    sol.p = Vector::Zero(layout.n_pressure());
    if (initial && initial->size() != layout.n_reduced)
        throw ValidationError("picard: initial iterate has the wrong size");

    if (duals.f_dual == 0.0 && !initial) {  // no forcing at all: v = 0 is the solution
        sol.converged = true;
        sol.history.push_back({0, 0.0, 0.0, options.initial_damping});
        return sol;
    }

    // sys.A_red stays frozen about g (the residual definition depends on it);
    // the oseen variant solves with a refreshed copy instead.
    std::unique_ptr<SaddleSolver> saddle =
        std::make_unique<SaddleSolver>(layout, sys.A_red, sys.B_red, sys.gauge);

    // base operator without the convection block, for the oseen refresh
    SpMat base_red;
    if (options.oseen_update) {
        const CarrierField g(params);
        const FlowField gf = g.flow();
        const SpMat V =
            assemble_velocity_form(layout, VelocityForm::Viscous, nullptr, options.quad_degree);
        const SpMat R =
            assemble_velocity_form(layout, VelocityForm::Reaction, &gf, options.quad_degree);
        base_red = layout.Z.transpose() * SpMat(V + R) * layout.Z;
    }

    double omega = options.initial_damping;
    double prev_res = initial ? duals.residual(sys, layout, sol.v, sol.p) : 1.0;
    for (int it = 1; it <= options.max_iterations; ++it) {
        Vector rhs = sys.f_red;
        if (!options.oseen_update)  // lagged inertia (the convection in A is about g only)
            rhs -= layout.to_reduced_rhs(assemble_inertia_load(layout, layout.to_full(sol.v)));
        const auto step = saddle->solve(rhs);

        Vector v_new, p_new;
        double res = 0.0;
        while (true) {
            v_new = sol.v + omega * (step.v - sol.v);
            p_new = sol.p + omega * (step.p - sol.p);
            res = duals.residual(sys, layout, v_new, p_new);
            if (res <= prev_res || omega <= options.min_damping) break;
            omega = std::max(0.5 * omega, options.min_damping);
        }
        const Vector dv = v_new - sol.v;
        sol.history.push_back(
            {it, res, std::sqrt(std::max(dv.dot(sys.K_red * dv), 0.0)), omega});
        sol.v = v_new;
        sol.p = p_new;
        prev_res = res;
        if (res <= options.tolerance) {
            sol.converged = true;
            break;
        }
        if (options.oseen_update) {
            // refresh the convection field to g + v_n; the reaction stays
            // about g, so (v.grad)v is approximated by (v_n.grad)v
            const CarrierField g(params);
            const Vector full = layout.to_full(sol.v);
            const FunctionSpaceLayout* lp = &layout;
            FlowField frozen{
                [g, full, lp](const Vec2& x) { return g.value(x) + eval_velocity(*lp, full, x); },
                [g, full, lp](const Vec2& x) {
                    Mat2 m = g.grad(x);
                    const Mat2 dv2 = eval_velocity_grad(*lp, full, x);
                    for (int a = 0; a < 2; ++a)
                        for (int b = 0; b < 2; ++b) m.m[a][b] += dv2.m[a][b];
                    return m;
                }};
            const SpMat C = assemble_velocity_form(layout, VelocityForm::Convection, &frozen,
                                                   options.quad_degree);
            const SpMat A_it = base_red + SpMat(layout.Z.transpose() * C * layout.Z);
            saddle = std::make_unique<SaddleSolver>(layout, A_it, sys.B_red, sys.gauge);
        }
    }
    if (!sol.converged && prev_res > 1e-6)
        throw SolverError("picard: no convergence within the iteration budget");
    return sol;
}

FlowField reconstruct_u(const SolutionBundle& sol) {
    const CarrierField g(sol.params);
    const Vector full = sol.layout->to_full(sol.v);
    const FunctionSpaceLayout* lp = sol.layout;
    return FlowField{
        [g, full, lp](const Vec2& x) { return g.value(x) + eval_velocity(*lp, full, x); },
        [g, full, lp](const Vec2& x) {
            Mat2 m = g.grad(x);
            const Mat2 dv = eval_velocity_grad(*lp, full, x);
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) m.m[a][b] += dv.m[a][b];
            return m;
        }};
}

// ---------------------------------------------------------------------------
// Manufactured solution on the straight channel, compatible with the slip
// conditions on x2 = +-1 and homogeneous at the truncation ends:
//   u1 = s(x1) cos(pi x2),  u2 = -s'(x1) sin(pi x2)/pi,  p = s(x1) x2,
// with s = (1 - (x1/X)^2)^4. Divergence-free by construction.

namespace {

struct Mms {
    double X;
    void sfun(double x, double& s, double& s1, double& s2, double& s3) const {
        const double w = x / X, q = 1.0 - w * w;
        s = q * q * q * q;
        s1 = -8.0 * w * q * q * q / X;
        s2 = -8.0 * q * q * (1.0 - 7.0 * w * w) / (X * X);
        s3 = 16.0 * w * q * (9.0 - 21.0 * w * w) / (X * X * X);
    }
    Vec2 velocity(const Vec2& x) const {
        double s, s1, s2, s3;
        sfun(x.x, s, s1, s2, s3);
        return {s * std::cos(M_PI * x.y), -s1 * std::sin(M_PI * x.y) / M_PI};
    }
    Mat2 velocity_grad(const Vec2& x) const {
        double s, s1, s2, s3;
        sfun(x.x, s, s1, s2, s3);
        const double c = std::cos(M_PI * x.y), sn = std::sin(M_PI * x.y);
        Mat2 g;
        g.m[0][0] = s1 * c;
        g.m[0][1] = -M_PI * s * sn;
        g.m[1][0] = -s2 * sn / M_PI;
        g.m[1][1] = -s1 * c;
        return g;
    }
    double pressure(const Vec2& x) const {
        double s, s1, s2, s3;
        sfun(x.x, s, s1, s2, s3);
        return s * x.y;
    }
    // F = -Laplace(u) + (u.grad)u + grad p
    Vec2 force(const Vec2& x) const {
        double s, s1, s2, s3;
        sfun(x.x, s, s1, s2, s3);
        const double c = std::cos(M_PI * x.y), sn = std::sin(M_PI * x.y);
        const double f1 = -(s2 - M_PI * M_PI * s) * c + s * s1 + s1 * x.y;
        const double f2 =
            s3 * sn / M_PI - M_PI * s1 * sn + sn * c / M_PI * (s1 * s1 - s * s2) + s;
        return {f1, f2};
    }
};

}  // namespace

MmsResult mms_convergence(int refinements, double h0, double half_length) {
    if (refinements < 2) throw ValidationError("mms_convergence: need at least 2 levels");
    const Mms mms{half_length};
    const auto geom = ChannelGeometry::straight();
    MmsResult out;
    for (int lev = 0; lev < refinements; ++lev) {
        const double h = h0 / std::pow(2.0, lev);
        const auto mesh = build_mesh(geom, half_length, h);
        const auto layout = build_spaces(mesh);

        CarrierParams params;  // zero flux: the manufactured field carries none
        params.flux = 0.0;
        params.cutoffs = CarrierParams::default_policy(geom, h);
        params.geom = geom;
        const std::function<Vec2(const Vec2&)> force = [&](const Vec2& x) {
            return mms.force(x);
        };
        PicardOptions opts;
        opts.tolerance = 1e-11;
        const auto sol = picard_solve(layout, params, opts, &force);

        // quadrature errors against the analytic solution
        const Vector full = layout.to_full(sol.v);
        const auto& rule = triangle_rule(8);
        double e_h1 = 0.0, e_p = 0.0;
        for (size_t c = 0; c < mesh.cells.size(); ++c) {
            const auto& t = mesh.cells[c];
            const CellGeom cg =
                CellGeom::make({mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]});
            const auto nds = layout.cell_vnodes((int)c);
            for (const auto& q : rule) {
                const Vec2 x = cg.point(q.l1, q.l2, q.l3);
                const P2Shape sh = cg.p2(q.l1, q.l2, q.l3);
                Mat2 dv = mms.velocity_grad(x);
                double ph = 0.0;
                for (int a = 0; a < 6; ++a) {
                    const double vx = full[2 * nds[a]], vy = full[2 * nds[a] + 1];
                    dv.m[0][0] -= vx * sh.dN[a].x;
                    dv.m[0][1] -= vx * sh.dN[a].y;
                    dv.m[1][0] -= vy * sh.dN[a].x;
                    dv.m[1][1] -= vy * sh.dN[a].y;
                }
                const double l[3] = {q.l1, q.l2, q.l3};
                for (int k = 0; k < 3; ++k) ph += sol.p[t[k]] * l[k];
                const double wt = q.w * cg.area;
                e_h1 += wt * dv.frobenius2();
                const double dp = mms.pressure(x) - ph;
                e_p += wt * dp * dp;
            }
        }
        out.h.push_back(h);
        out.vel_h1_error.push_back(std::sqrt(e_h1));
        out.pressure_l2_error.push_back(std::sqrt(e_p));
    }
    const int last = refinements - 1;
    const double span = std::log(out.h[0] / out.h[last]);
    out.vel_order = std::log(out.vel_h1_error[0] / out.vel_h1_error[last]) / span;
    out.pressure_order =
        std::log(out.pressure_l2_error[0] / out.pressure_l2_error[last]) / span;
    return out;
}

}  // namespace channel
