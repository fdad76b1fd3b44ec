#pragma once

#include <array>
#include <vector>

#include "channel/geometry.hpp"

namespace channel {

enum class BoundaryTag { WallLower, WallUpper, EndLeft, EndRight };

struct BoundaryEdge {
    int n0, n1;  // node ids, oriented along the boundary
    BoundaryTag tag;
};

// Structured criss-cross triangulation of Omega_T: nx x ny quads from the
// transfinite map (x1, s) -> (x1, f1 + (s+1)(f2-f1)/2), each quad split into
// four triangles at its centroid. Wall nodes sit exactly on the wall graphs.
struct TruncatedMesh {
    ChannelGeometry geom = ChannelGeometry::straight();
    double half_length = 0.0;  // T
    double h = 0.0;            // target cell diameter
    int nx = 0, ny = 0;

    std::vector<Vec2> nodes;
    std::vector<std::array<int, 3>> cells;  // CCW
    std::vector<BoundaryEdge> boundary;

    int grid_node(int i, int j) const { return j * (nx + 1) + i; }
    int center_node(int i, int j) const { return (nx + 1) * (ny + 1) + j * nx + i; }

    double cell_area(int c) const;
    Vec2 centroid(int c) const;
    double min_quality() const;  // 2 r_in / r_circ in (0, 1]
};

TruncatedMesh build_mesh(const ChannelGeometry& geom, double T, double h);

struct SlabSelection {
    double a = 0.0, b = 0.0;
    std::vector<int> cells;  // cells with centroid x1 in (a, b)
};

SlabSelection slab_submesh(const TruncatedMesh& mesh, double a, double b);

// Clip a triangle against the vertical strip a < x1 < b; returns the convex
// clipped polygon (possibly empty), fan-triangulated into (p0, pi, pi+1).
std::vector<Vec2> clip_cell_to_slab(const std::array<Vec2, 3>& tri, double a, double b);

double mesh_area(const TruncatedMesh& mesh);

// Exact area of the clipped region a < x1 < b.
double slab_area(const TruncatedMesh& mesh, double a, double b);

}  // namespace channel
