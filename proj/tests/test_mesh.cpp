#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "channel/mesh.hpp"
#include "channel/quadrature.hpp"

using namespace channel;

namespace {
double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }
}  // namespace

TEST_CASE("triangle quadrature integrates monomials exactly") {
    // On the reference simplex, int l1^a l2^b dA = a! b! / (a + b + 2)!.
    // Our rules are in barycentric form with weights summing to 1 (unit area).
    for (int degree : {1, 2, 4, 6, 8}) {
        const auto rule = triangle_rule(degree);
        double wsum = 0.0;
        for (const auto& q : rule) wsum += q.w;
        CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
        for (int a = 0; a + 0 <= degree; ++a)
            for (int b = 0; a + b <= degree; ++b) {
                double val = 0.0;
                for (const auto& q : rule) val += q.w * std::pow(q.l1, a) * std::pow(q.l2, b);
                const double exact = 2.0 * factorial(a) * factorial(b) / factorial(a + b + 2);
                CHECK(val == doctest::Approx(exact).epsilon(1e-12));
            }
    }
}

TEST_CASE("gauss-legendre integrates high-degree polynomials") {
    for (int n : {4, 12, 24}) {
        const auto& gl = gauss_legendre(n);
        for (int k = 0; k <= 2 * n - 1; ++k) {
            double val = 0.0;
            for (const auto& q : gl) val += q.w * std::pow(q.x, k);
            const double exact = (k % 2 == 0) ? 2.0 / (k + 1) : 0.0;
            CHECK(std::abs(val - exact) < 1e-13);
        }
    }
}

TEST_CASE("straight mesh: counts, euler characteristic, area") {
    const auto geom = ChannelGeometry::straight();
    const auto mesh = build_mesh(geom, 2.0, 0.5);
    CHECK(mesh.nx == 8);
    CHECK(mesh.ny == 4);
    CHECK(int(mesh.nodes.size()) == 9 * 5 + 8 * 4);
    CHECK(int(mesh.cells.size()) == 4 * 8 * 4);

    std::set<std::pair<int, int>> edges;
    for (const auto& c : mesh.cells)
        for (int k = 0; k < 3; ++k) {
            int a = c[k], b = c[(k + 1) % 3];
            edges.insert({std::min(a, b), std::max(a, b)});
        }
    const int V = int(mesh.nodes.size()), E = int(edges.size()), F = int(mesh.cells.size());
    CHECK(V - E + F == 1);  // disk topology

    double area = 0.0;
    for (int c = 0; c < F; ++c) area += mesh.cell_area(c);
    CHECK(area == doctest::Approx(2.0 * 2.0 * 2.0).epsilon(1e-13));
    CHECK(mesh.min_quality() > 0.3);
}

TEST_CASE("bump mesh: walls pinned, area matches 1d quadrature") {
    const auto geom = ChannelGeometry::bump(0.25, 3.0);
    const auto mesh = build_mesh(geom, 5.0, 0.25);
    for (const auto& e : mesh.boundary) {
        if (e.tag == BoundaryTag::WallUpper || e.tag == BoundaryTag::WallLower) {
            for (int n : {e.n0, e.n1}) {
                const Vec2 p = mesh.nodes[n];
                const WallData w = geom.eval_walls(p.x);
                const double wall = (e.tag == BoundaryTag::WallUpper) ? w.f2 : w.f1;
                CHECK(std::abs(p.y - wall) < 1e-14);
            }
        }
    }
    // Exact area: int (f2 - f1) dx1 over [-5, 5] by Gauss panels.
    const auto& gl = gauss_legendre(24);
    double exact = 0.0;
    for (int i = 0; i < 40; ++i) {
        const double a = -5.0 + 10.0 * i / 40.0, b = a + 0.25;
        for (const auto& q : gl) {
            const WallData w = geom.eval_walls(0.5 * (a + b) + 0.5 * (b - a) * q.x);
            exact += 0.5 * (b - a) * q.w * (w.f2 - w.f1);
        }
    }
    CHECK(mesh_area(mesh) == doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("slab areas: exact clipping and additivity") {
    const auto geom = ChannelGeometry::straight();
    const auto mesh = build_mesh(geom, 3.0, 0.4);  // slab edges not grid-aligned
    const double whole = mesh_area(mesh);
    CHECK(slab_area(mesh, -3.0, 3.0) == doctest::Approx(whole).epsilon(1e-13));
    CHECK(slab_area(mesh, -0.7, 1.3) == doctest::Approx(2.0 * 2.0).epsilon(1e-12));
    const double left = slab_area(mesh, -3.0, 0.1);
    const double right = slab_area(mesh, 0.1, 3.0);
    CHECK(left + right == doctest::Approx(whole).epsilon(1e-12));
}

TEST_CASE("slab submesh keeps only straddled cells' centroids") {
    const auto geom = ChannelGeometry::straight();
    const auto mesh = build_mesh(geom, 2.0, 0.5);
    const auto sub = slab_submesh(mesh, -0.5, 0.5);
    CHECK(!sub.cells.empty());
    for (int c : sub.cells) {
        const Vec2 ctr = mesh.centroid(c);
        CHECK(ctr.x >= -0.5);
        CHECK(ctr.x <= 0.5);
    }
}

TEST_CASE("mesh validation") {
    const auto bump = ChannelGeometry::bump(0.3, 4.0);
    CHECK_THROWS_AS(build_mesh(bump, 4.5, 0.25), ValidationError);  // T < L + 1
    CHECK_THROWS_AS(build_mesh(ChannelGeometry::straight(), 2.0, -0.1), ValidationError);
    CHECK_THROWS_AS(build_mesh(ChannelGeometry::straight(), 0.0, 0.25), ValidationError);
}
