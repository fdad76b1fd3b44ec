#include "channel/cutoffs.hpp"

#include "channel/quadrature.hpp"

#include <cmath>

namespace channel {

namespace {

void check_eps(double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("mu_cutoff: eps must lie in (0, 1)");
}

}  // namespace

double mu_plateau(double eps) {
    check_eps(eps);
    const double r = kMuRounding;
    // Derivative profile: zero on [0,p]; linear ramp down to -eps/t on
    // [p, p(1+2r)]; -eps/t on [p(1+2r), eps(1-2r)]; linear ramp back to zero
    // on [eps(1-2r), eps]. Total area of -mu' must be 1:
    //   r*eps/(1+2r) + eps*log(eps(1-2r)/(p(1+2r))) + r*eps/(1-2r) = 1.
    return eps * (1.0 - 2.0 * r) / (1.0 + 2.0 * r) *
           std::exp(-1.0 / eps + r / (1.0 + 2.0 * r) + r / (1.0 - 2.0 * r));
}

CutoffEval mu_cutoff(double t, double eps) {
    check_eps(eps);
    if (t < 0.0) throw ValidationError("mu_cutoff: t must be nonnegative");

    const double r = kMuRounding;
    const double p = mu_plateau(eps);
    const double t1 = p * (1.0 + 2.0 * r);        // end of lower rounding
    const double t2 = eps * (1.0 - 2.0 * r);      // start of upper rounding
    const double w1 = 2.0 * r * p;
    const double w2 = 2.0 * r * eps;

    if (t <= p) return {1.0, 0.0, 0.0};
    if (t < t1) {
        double slope = eps / (t1 * w1);
        double dt = t - p;
        return {1.0 - 0.5 * slope * dt * dt, -slope * dt, -slope};
    }
    if (t < t2) {
        double mu1 = 1.0 - r * eps / (1.0 + 2.0 * r);
        return {mu1 - eps * std::log(t / t1), -eps / t, eps / (t * t)};
    }
    if (t < eps) {
        double slope = eps / (t2 * w2);
        double dt = eps - t;
        return {0.5 * slope * dt * dt, -slope * dt, slope};
    }
    return {0.0, 0.0, 0.0};
}

namespace {

// Quadratic transition 0 -> 1 over [lo, hi] with triangular derivative
// profile (the optimum for the pi' and pi'' bounds). u >= 0.
CutoffEval pi_core(double u, double lo, double hi) {
    if (u <= lo) return {0.0, 0.0, 0.0};
    if (u >= hi) return {1.0, 0.0, 0.0};
    double w = hi - lo;
    double c = 4.0 / (w * w);  // |pi''|; peak slope is 2/w at the midpoint
    if (u <= lo + 0.5 * w) {
        double dt = u - lo;
        return {0.5 * c * dt * dt, c * dt, c};
    }
    double dt = hi - u;
    return {1.0 - 0.5 * c * dt * dt, c * dt, -c};
}

// C-infinity bump mollifier on (-rho, rho), unnormalised.
double bump_kernel(double s, double rho) {
    double q = s / rho;
    double arg = 1.0 - q * q;
    return arg > 0.0 ? std::exp(-1.0 / arg) : 0.0;
}

// Mollified transition: pi_core compressed to [lo+rho, hi-rho] convolved
// with the bump of width rho. Supports stay exactly [lo, hi]; the derivative
// bounds grow only by the compression factor w/(w - 2*rho).
CutoffEval pi_mollified(double u, double lo, double hi, double rho) {
    // Split the kernel interval at the breakpoints of the compressed core so
    // each Gauss panel sees a polynomial times the smooth kernel.
    double clo = lo + rho, chi = hi - rho;
    double cmid = 0.5 * (clo + chi);
    double cuts[3] = {u - chi, u - cmid, u - clo};
    double panel[5] = {-rho, -rho, -rho, -rho, rho};
    int np = 1;
    for (double c : cuts)
        if (c > -rho && c < rho) panel[np++] = c;
    panel[np] = rho;

    const auto& gauss = gauss_legendre(24);
    double norm = 0.0, v = 0.0, d1 = 0.0, d2 = 0.0;
    for (int ip = 0; ip < np; ++ip) {
        double a = panel[ip], b = panel[ip + 1];
        double half = 0.5 * (b - a), midp = 0.5 * (a + b);
        for (const auto& q : gauss) {
            double s = midp + half * q.x;
            double k = q.w * half * bump_kernel(s, rho);
            CutoffEval core = pi_core(u - s, clo, chi);
            norm += k;
            v += k * core.value;
            d1 += k * core.d1;
            d2 += k * core.d2;
        }
    }
    return {v / norm, d1 / norm, d2 / norm};
}

}  // namespace

CutoffEval pi_cutoff(double t, double d, bool mollified) {
    if (!(d > 0.0)) throw ValidationError("pi_cutoff: d must be positive");

    double sign = (t >= 0.0) ? 1.0 : -1.0;
    double u = std::abs(t);
    const double lo = 1.25 * d, hi = 1.75 * d;

    CutoffEval e;
    if (mollified) {
        if (u <= lo) return {0.0, 0.0, 0.0};
        if (u >= hi) return {1.0, 0.0, 0.0};
        e = pi_mollified(u, lo, hi, 0.01 * d);
    } else {
        e = pi_core(u, lo, hi);
    }
    return {e.value, sign * e.d1, e.d2};
}

}  // namespace channel
