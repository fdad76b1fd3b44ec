#pragma once

#include <Eigen/Sparse>
#include <array>
#include <cstdint>
#include <vector>

#include "channel/mesh.hpp"

namespace channel {

using SpMat = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

// P2 shape data at a single point of a cell: 6 scalar basis functions
// (3 vertex + 3 edge) with physical-space gradients.
struct P2Shape {
    std::array<double, 6> N;
    std::array<Vec2, 6> dN;
};

// Barycentric gradients and the P2/P1 shape evaluation for a straight cell.
struct CellGeom {
    std::array<Vec2, 3> p;
    std::array<Vec2, 3> grad_l;  // gradients of barycentric coordinates
    double area;

    static CellGeom make(const std::array<Vec2, 3>& pts);
    P2Shape p2(double l1, double l2, double l3) const;
    Vec2 point(double l1, double l2, double l3) const {
        return p[0] * l1 + p[1] * l2 + p[2] * l3;
    }
};

enum class SpaceKind {
    SlipWalls,      // v.n = 0 on walls, v = 0 on the end sections
    FullDirichlet,  // v = 0 on the whole boundary
};

// Mixed P2 velocity / P1 pressure layout with boundary constraints applied by
// elimination through the sparse prolongation Z (reduced -> full xy DOFs).
struct FunctionSpaceLayout {
    const TruncatedMesh* mesh = nullptr;
    SpaceKind kind = SpaceKind::SlipWalls;

    int n_vertices = 0;
    int n_edges = 0;
    std::vector<std::array<int, 3>> cell_edges;  // local edge k joins verts k, k+1

    enum class NodeKind : std::uint8_t { Free, Wall, End };
    std::vector<Vec2> vnode_pos;        // vertex nodes, then edge nodes
    std::vector<NodeKind> vnode_kind;
    std::vector<Vec2> vnode_tangent;    // unit wall tangent at Wall nodes

    SpMat Z;            // (2 * n_vnodes) x n_reduced
    int n_reduced = 0;

    int n_vnodes() const { return n_vertices + n_edges; }
    int n_pressure() const { return n_vertices; }
    // Global velocity-node ids of the 6 local P2 nodes of cell c.
    std::array<int, 6> cell_vnodes(int c) const;

    Vector to_full(const Vector& reduced) const { return Z * reduced; }
    Vector to_reduced_rhs(const Vector& full) const { return Z.transpose() * full; }
};

FunctionSpaceLayout build_spaces(const TruncatedMesh& mesh,
                                 SpaceKind kind = SpaceKind::SlipWalls);

// Locate the cell containing p (structured walk); returns -1 outside.
int locate_cell(const TruncatedMesh& mesh, const Vec2& p);

// Discrete velocity/pressure evaluation from coefficient vectors.
struct MixedField {
    const FunctionSpaceLayout* layout = nullptr;
    Vector velocity;  // reduced coefficients
    Vector pressure;  // P1 vertex coefficients, mean-zero
};

Vec2 eval_velocity(const FunctionSpaceLayout& layout, const Vector& full_xy, const Vec2& p);
Mat2 eval_velocity_grad(const FunctionSpaceLayout& layout, const Vector& full_xy, const Vec2& p);
double eval_pressure(const FunctionSpaceLayout& layout, const Vector& pressure, const Vec2& p);

}  // namespace channel
