#pragma once

#include "channel/common.hpp"

namespace channel {

struct CutoffEval {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

// Fraction of each junction over which the Hopf log profile is C^1-rounded.
inline constexpr double kMuRounding = 0.01;

// Plateau width p of mu(.; eps): mu == 1 on [0, p]. Chosen so the rounded
// profile still integrates its derivative to exactly -1 (mu(eps) = 0).
double mu_plateau(double eps);

// Hopf boundary-layer cutoff. mu(0)=1, mu(t)=0 for t >= eps, nonincreasing,
// C^1, and -mu'(t)*t <= eps everywhere (equality on the log branch).
CutoffEval mu_cutoff(double t, double eps);

// Axial transition cutoff: even, 0 for |t| <= 5d/4, 1 for |t| >= 7d/4,
// C^{1,1} with |pi'| <= 4/d and |pi''| <= 16/d^2 (both attained).
// The mollified variant is C-infinity with the same bounds relaxed by 1.1.
CutoffEval pi_cutoff(double t, double d, bool mollified = false);

}  // namespace channel
