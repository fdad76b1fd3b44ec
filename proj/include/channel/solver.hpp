#pragma once

#include <optional>

#include "channel/assembly.hpp"
#include "channel/carrier.hpp"
#include "channel/norms.hpp"
#include "channel/saddle.hpp"

namespace channel {

struct PicardOptions {
    int max_iterations = 60;
    double tolerance = 1e-10;    // relative nonlinear residual
    double initial_damping = 1.0;
    double min_damping = 0.125;
    bool oseen_update = false;   // refresh the frozen convection field each step
    int quad_degree = 6;
};

struct IterationRecord {
    int iteration;
    double residual;   // relative weak residual of the nonlinear system
    double increment;  // H1 seminorm of the step actually taken
    double damping;
};

struct SolutionBundle {
    CarrierParams params;
    const FunctionSpaceLayout* layout = nullptr;
    Vector v;         // reduced perturbation coefficients
    Vector p;         // mean-zero pressure
    std::vector<IterationRecord> history;
    bool converged = false;

    Vector full_velocity() const { return layout->to_full(v); }
};

// Operator pieces of the perturbation problem around the carrier g:
//   2(D(v),D(phi)) + ((g.grad)v,phi) + ((v.grad)g,phi) [+ (v.grad)v lagged]
struct PerturbationSystem {
    const FunctionSpaceLayout* layout = nullptr;
    SpMat A_red;    // viscous + frozen convection + reaction, reduced
    SpMat B_red;
    SpMat K_red;    // grad form, reduced (for norms / dual residual)
    Vector f_red;   // carrier load (+ optional body force)
    Vector gauge;
};

PerturbationSystem build_perturbation_system(
    const FunctionSpaceLayout& layout, const CarrierParams& params,
    const std::function<Vec2(const Vec2&)>* body_force = nullptr, int quad_degree = 6);

// One linearized (Stokes-plus-frozen-advection) solve: the Lax-Milgram step.
SolutionBundle solve_linearized(const FunctionSpaceLayout& layout, const CarrierParams& params,
                                int quad_degree = 6);

// Damped fixed-point iteration with the inertia term lagged; starts from
// v0 = 0 unless an explicit initial iterate is supplied.
SolutionBundle picard_solve(const FunctionSpaceLayout& layout, const CarrierParams& params,
                            const PicardOptions& options = {},
                            const std::function<Vec2(const Vec2&)>* body_force = nullptr,
                            const Vector* initial = nullptr);

// Relative dual-norm residual of the nonlinear discrete system at (v, p):
// sqrt(r_v' K^-1 r_v + r_p' M_p^-1 r_p) / sqrt(f' K^-1 f).
double weak_residual(const PerturbationSystem& sys, const Vector& v, const Vector& p);

// u = g + v as an evaluable field (for reports and decay diagnostics).
FlowField reconstruct_u(const SolutionBundle& sol);

struct MmsResult {
    std::vector<double> h;
    std::vector<double> vel_h1_error;
    std::vector<double> pressure_l2_error;
    double vel_order = 0.0;
    double pressure_order = 0.0;
};

// Manufactured-solution convergence study on the straight channel.
MmsResult mms_convergence(int refinements = 3, double h0 = 0.5, double half_length = 4.0);

}  // namespace channel
