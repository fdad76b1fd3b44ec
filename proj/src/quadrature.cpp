#include "channel/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace channel {

namespace {

std::vector<QuadPoint1D> build_gauss(int n) {
    std::vector<QuadPoint1D> pts(n);
    for (int i = 0; i < n; ++i) {
        // Tricomi initial guess, then Newton on P_n.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        pts[i] = {x, 2.0 / ((1.0 - x * x) * dp * dp)};
    }
    return pts;
}

void push3(std::vector<TriQuadPoint>& r, double a, double w) {
    double c = 1.0 - 2.0 * a;
    r.push_back({a, a, c, w});
    r.push_back({a, c, a, w});
    r.push_back({c, a, a, w});
}

void push6(std::vector<TriQuadPoint>& r, double a, double b, double w) {
    double c = 1.0 - a - b;
    r.push_back({a, b, c, w});
    r.push_back({a, c, b, w});
    r.push_back({b, a, c, w});
    r.push_back({b, c, a, w});
    r.push_back({c, a, b, w});
    r.push_back({c, b, a, w});
}

std::vector<TriQuadPoint> build_triangle(int degree) {
    std::vector<TriQuadPoint> r;
    switch (degree) {
        case 1:
            r.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0});
            break;
        case 2:
            push3(r, 1.0 / 6.0, 1.0 / 3.0);
            break;
        case 4:
            push3(r, 0.445948490915965, 0.223381589678011);
            push3(r, 0.091576213509771, 0.109951743655322);
            break;
        case 6:
            push3(r, 0.249286745170910, 0.116786275726379);
            push3(r, 0.063089014491502, 0.050844906370207);
            push6(r, 0.310352451033785, 0.053145049844816, 0.082851075618374);
            break;
        case 8: {
            // Collapsed 5x5 product Gauss rule (exact through degree 9); the
            // tabulated symmetric rules only carry ~9 accurate digits.
            const auto& gl = gauss_legendre(5);
            for (const auto& qs : gl)
                for (const auto& qt : gl) {
                    const double s = 0.5 * (qs.x + 1.0), t = 0.5 * (qt.x + 1.0);
                    const double y = t * (1.0 - s);
                    r.push_back({1.0 - s - y, s, y, 0.5 * qs.w * qt.w * (1.0 - s)});
                }
            break;
        }
        default:
            throw ValidationError("triangle_rule: unsupported degree");
    }
    return r;
}

std::mutex cache_mutex;

}  // namespace

const std::vector<QuadPoint1D>& gauss_legendre(int n) {
    if (n < 1 || n > 256) throw ValidationError("gauss_legendre: order out of range");
    static std::map<int, std::vector<QuadPoint1D>> cache;
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build_gauss(n)).first;
    return it->second;
}

const std::vector<TriQuadPoint>& triangle_rule(int degree) {
    static std::map<int, std::vector<TriQuadPoint>> cache;
    static std::mutex tri_mutex;
    std::lock_guard<std::mutex> lock(tri_mutex);
    auto it = cache.find(degree);
    if (it == cache.end()) it = cache.emplace(degree, build_triangle(degree)).first;
    return it->second;
}

}  // namespace channel
