#include "channel/geometry.hpp"

#include <cmath>

namespace channel {

namespace {

// Quintic smoothstep bump on [-1, 1]: value 1 at 0, value and first two
// derivatives 0 at |s| = 1. C^2 at the origin (leading odd term is |s|^3).
struct BumpEval {
    double v, d1, d2;
};

BumpEval quintic_bump(double s) {
    double u = std::abs(s);
    if (u >= 1.0) return {0.0, 0.0, 0.0};
    double sign = (s >= 0.0) ? 1.0 : -1.0;
    double u2 = u * u;
    double v = 1.0 - u2 * u * (10.0 - 15.0 * u + 6.0 * u2);
    double dv_du = -30.0 * u2 * (1.0 - u) * (1.0 - u);
    double d2v_du2 = -60.0 * u * (1.0 - u) * (1.0 - 2.0 * u);
    return {v, sign * dv_du, d2v_du2};
}

}  // namespace

ChannelGeometry::ChannelGeometry(ProfileFamily family, double amplitude,
                                 double support_half_width, double min_width)
    : family_(family), amplitude_(family == ProfileFamily::Straight ? 0.0 : amplitude),
      support_(support_half_width), min_width_(min_width) {
    if (support_ <= 0.0) throw ValidationError("geometry: support half-width L must be positive");
    if (min_width_ <= 0.0) throw ValidationError("geometry: min_width must be positive");
    // Width is 2*(1 + a*phi); the tightest section is at the peak for a < 0.
    double narrowest = 2.0 * (1.0 + std::min(amplitude_, 0.0));
    if (narrowest < min_width_)
        throw ValidationError("geometry: walls violate the minimum width f2 - f1 >= m");
}

WallData ChannelGeometry::eval_walls(double x1) const {
    if (family_ == ProfileFamily::Straight || std::abs(x1) >= support_)
        return {-1.0, 1.0, 0.0, 0.0, 0.0, 0.0};
    BumpEval b = quintic_bump(x1 / support_);
    double f2 = 1.0 + amplitude_ * b.v;
    double df2 = amplitude_ * b.d1 / support_;
    double ddf2 = amplitude_ * b.d2 / (support_ * support_);
    return {-f2, f2, -df2, df2, -ddf2, ddf2};
}

Vec2 ChannelGeometry::upper_normal(double x1) const {
    WallData w = eval_walls(x1);
    double len = std::hypot(w.df2, 1.0);
    return {-w.df2 / len, 1.0 / len};
}

Vec2 ChannelGeometry::lower_normal(double x1) const {
    WallData w = eval_walls(x1);
    double len = std::hypot(w.df1, 1.0);
    return {w.df1 / len, -1.0 / len};
}

bool ChannelGeometry::contains(const Vec2& p, double tol) const {
    WallData w = eval_walls(p.x);
    return p.y >= w.f1 - tol && p.y <= w.f2 + tol;
}

}  // namespace channel
