#pragma once

#include <string>

#include "channel/common.hpp"

namespace channel {

// Wall heights and their first two derivatives at a fixed x1.
struct WallData {
    double f1, f2;    // lower / upper wall height
    double df1, df2;  // first derivatives
    double ddf1, ddf2;
};

enum class ProfileFamily { Straight, Bump };

// Channel domain f1(x1) < x2 < f2(x1), walls flat (f2=1, f1=-1) for |x1| >= L.
// The bump family is f2 = 1 + a*phi(x1/L), f1 = -f2, with phi a compactly
// supported C^2 quintic (phi(0)=1, phi and its first two derivatives vanish
// at +-1).
class ChannelGeometry {
public:
    ChannelGeometry(ProfileFamily family, double amplitude, double support_half_width,
                    double min_width = 1e-8);

    static ChannelGeometry straight() { return {ProfileFamily::Straight, 0.0, 1.0}; }
    static ChannelGeometry bump(double a, double L, double min_width = 1e-8) {
        return {ProfileFamily::Bump, a, L, min_width};
    }

    WallData eval_walls(double x1) const;

    double amplitude() const { return amplitude_; }
    double straight_from() const { return support_; }
    double min_width() const { return min_width_; }
    ProfileFamily family() const { return family_; }

    // Outward unit normal of the given wall at x1 (analytic, not faceted).
    Vec2 upper_normal(double x1) const;
    Vec2 lower_normal(double x1) const;

    bool contains(const Vec2& p, double tol = 0.0) const;

private:
    ProfileFamily family_;
    double amplitude_;
    double support_;
    double min_width_;
};

}  // namespace channel
