#pragma once

#include <cstddef>
#include <vector>

#include "channel/common.hpp"

namespace channel {

struct QuadPoint1D {
    double x;  // node in [-1, 1]
    double w;
};

// Gauss-Legendre rule with n points, exact for polynomials of degree 2n-1.
// Cached per order.
const std::vector<QuadPoint1D>& gauss_legendre(int n);

struct TriQuadPoint {
    double l1, l2, l3;  // barycentric coordinates
    double w;           // weight, sums to 1 over the rule
};

// Symmetric triangle rules exact for the given total polynomial degree
// (supported: 1, 2, 4, 6, 8). Weights sum to 1 (multiply by triangle area).
const std::vector<TriQuadPoint>& triangle_rule(int degree);

}  // namespace channel
