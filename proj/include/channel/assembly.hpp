#pragma once

#include <functional>

#include "channel/fe.hpp"
#include "channel/quadrature.hpp"

namespace channel {

// Analytic or reconstructed velocity field with gradient.
struct FlowField {
    std::function<Vec2(const Vec2&)> value;
    std::function<Mat2(const Vec2&)> grad;
};

enum class VelocityForm {
    Grad,        // (grad v, grad phi)
    Viscous,     // (2 D(v), D(phi))
    Mass,        // (v, phi)
    DivDiv,      // (div v, div phi)
    Convection,  // ((b . grad) v, phi)
    Reaction,    // ((v . grad) b, phi)
};

// All matrices live in the full xy DOF space (2 * n_vnodes); reduce with Z.
SpMat assemble_velocity_form(const FunctionSpaceLayout& layout, VelocityForm form,
                             const FlowField* b = nullptr, int quad_degree = 4);

// (q, div v): n_pressure rows by 2*n_vnodes columns.
SpMat assemble_divergence(const FunctionSpaceLayout& layout);

SpMat assemble_pressure_mass(const FunctionSpaceLayout& layout);

// Vector of integrals of the P1 pressure basis (for the mean-zero gauge).
Vector pressure_integrals(const FunctionSpaceLayout& layout);

// (f, phi) with analytic f; optional per-cell uniform subdivision levels for
// integrands with unresolved interior layers.
Vector assemble_load(const FunctionSpaceLayout& layout,
                     const std::function<Vec2(const Vec2&)>& f, int quad_degree = 6,
                     const std::function<int(int)>& sublevels = nullptr);

// Carrier load of the weak problem: -(2 D(g), D(phi)) - ((g . grad) g, phi).
Vector assemble_carrier_load(const FunctionSpaceLayout& layout, const FlowField& g,
                             int quad_degree = 6,
                             const std::function<int(int)>& sublevels = nullptr);

// ((v . grad) v, phi) for a discrete velocity coefficient field (the lagged
// inertia term of the fixed-point iteration).
Vector assemble_inertia_load(const FunctionSpaceLayout& layout, const Vector& full_xy,
                             int quad_degree = 6);

// Cellwise linear representation (values at the 3 vertices) of div of a full
// velocity coefficient vector; exact since div of P2 is linear per cell.
std::vector<std::array<double, 3>> cellwise_divergence(const FunctionSpaceLayout& layout,
                                                       const Vector& full_xy);

// (div phi, w) for a cellwise linear w.
Vector assemble_div_weighted_load(const FunctionSpaceLayout& layout,
                                  const std::vector<std::array<double, 3>>& w);

// L2 norm of a cellwise linear function.
double cellwise_l2_norm(const TruncatedMesh& mesh, const std::vector<std::array<double, 3>>& w);

}  // namespace channel
