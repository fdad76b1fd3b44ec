#pragma once

#include "channel/fe.hpp"

namespace channel {

struct FieldNorms {
    double l2 = 0.0;
    double l4 = 0.0;
    double h1_semi = 0.0;   // || grad v ||
    double sym_grad = 0.0;  // sqrt(2) || D(v) || (the viscous energy root)
    double div = 0.0;
};

FieldNorms velocity_norms(const FunctionSpaceLayout& layout, const Vector& full_xy);

// sqrt of int_{a < x1 < b} |grad v|^2 with exact clipping of straddled cells.
double grad_norm_slab(const FunctionSpaceLayout& layout, const Vector& full_xy, double a,
                      double b);

double l2_norm_slab(const FunctionSpaceLayout& layout, const Vector& full_xy, double a, double b);

// Column-averaged discrete flux of a coefficient field near station x1: the
// gradient of a one-column P1 ramp tested against v1. For a discretely
// divergence-free slip field this is the exact (weak) cross-section flux.
double station_flux(const FunctionSpaceLayout& layout, const Vector& full_xy, double x1);

double pressure_l2(const FunctionSpaceLayout& layout, const Vector& pressure);

}  // namespace channel
