#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "channel/solver.hpp"

namespace channel {

// --- eigenvalue-based constants --------------------------------------------

struct EigenEstimate {
    double value = 0.0;       // the constant itself (M1 or the Korn c)
    double eigenvalue = 0.0;  // minimal Rayleigh quotient it came from
    int iterations = 0;
    std::vector<double> history;  // Rayleigh quotient per iteration
};

// M1 = 1/sqrt(lambda_min) of (grad, grad) against (v, v) on the constrained
// space with the cross-section flux pinned to zero at every interior grid
// line (penalized; see the flux functionals below).
EigenEstimate poincare_constant(const FunctionSpaceLayout& layout);

// c = min 2 ||D(v)||^2 / ||grad v||^2 over the discretely divergence-free
// constrained space (divergence imposed by penalty).
EigenEstimate korn_constant(const FunctionSpaceLayout& layout);

// Simpson flux functionals F_i (full xy dofs): F_i . v = flux of v through
// the interior grid line x1 = x_i; exact for the P2 trace.
std::vector<Vector> flux_functionals(const FunctionSpaceLayout& layout);

// --- L4 embedding -----------------------------------------------------------

struct EmbeddingEstimate {
    double value = 0.0;  // lower bound for M4 = sup ||v||_L4 / ||grad v||_L2
    Vector maximizer;    // reduced coefficients of the best field found
    int samples = 0;
    int ascent_steps = 0;
};

EmbeddingEstimate embedding_bound(const FunctionSpaceLayout& layout, int samples,
                                  std::uint64_t seed = 1);

// --- Bogovskii --------------------------------------------------------------

struct BogovskiiResult {
    Vector a;            // reduced H1_0 field with div a = f weakly
    double ratio = 0.0;  // ||grad a|| / ||f||
    double residual = 0.0;  // relative dual-norm defect of div a = f
};

// layout must be FullDirichlet; f mean-zero to 1e-10 relative.
BogovskiiResult bogovskii_bound(const FunctionSpaceLayout& layout,
                                const std::function<double(const Vec2&)>& f,
                                int quad_degree = 6);

// --- decay ------------------------------------------------------------------

struct DecayReport {
    std::vector<double> t_grid;
    std::vector<double> y_plus;    // int zeta+ |grad v|^2
    std::vector<double> dy_plus;   // -(y+)' = int_{E+} |grad v|^2 (exact)
    std::vector<double> y_minus;   // mirrored left-end profile
    double fitted_rate = 0.0;      // y+ ~ exp(-rate * t) on the window
    double fit_window[2] = {0.0, 0.0};
    double r_squared = 0.0;
    double C4_empirical = 0.0;     // 1 / fitted_rate
    bool exact_zero = false;
};

DecayReport decay_profile(const SolutionBundle& bundle, const std::vector<double>& t_grid);

// int over a < x1 < b of w(x1) |grad v|^2 with w linear (exact cell cuts).
double weighted_grad2(const FunctionSpaceLayout& layout, const Vector& full_xy, double a,
                      double b, double w_at_a, double w_at_b);

// --- slab growth ------------------------------------------------------------

struct GrowthReport {
    std::vector<double> t_grid;
    std::vector<double> slab_h1;      // ||u||_H1 on the slab (t-1, t)
    std::vector<double> slab_l4;      // ||u||_L4 on the same slab
    std::vector<double> cumulative;   // ||grad u||_L2 on |x1| < t
    double C6_empirical = 0.0;        // max cumulative / (1 + sqrt(t))
};

GrowthReport growth_profile(const SolutionBundle& bundle, const std::vector<double>& t_grid);

// --- uniqueness probe -------------------------------------------------------

struct ProbeReport {
    std::vector<std::vector<double>> distances;  // pairwise H1, symmetric
    double max_distance = 0.0;
    double contraction_estimate = 0.0;  // max observed increment ratio
    std::vector<double> t_grid;
    std::vector<double> y_diff;         // int zeta |grad (v_i - v_j)|^2, worst pair
    double tail_normalized = 0.0;       // max over the tail of y(t) / t^3
    std::string verdict;                // coincide | distinct | inconclusive
    std::vector<SolutionBundle> runs;
};

ProbeReport uniqueness_probe(const FunctionSpaceLayout& layout, const CarrierParams& params,
                             const std::vector<Vector>& starts, const PicardOptions& opts = {});

// The three canonical starts: zero, unit-energy random, twice the linearized
// solution.
std::vector<Vector> standard_starts(const FunctionSpaceLayout& layout,
                                    const CarrierParams& params, std::uint64_t seed = 1);

// --- Saint-Venant dichotomy -------------------------------------------------

// Classifies a nonnegative series z(t) sampled on an increasing grid against
// the alternative "z trivial or z(t) >~ t^{m/(m-1)}" implied by the
// differential inequality z <= c0 (z')^m for t >= t0.
std::string saint_venant_check(const std::vector<double>& t, const std::vector<double>& z,
                               double m, double c0, double tau1, double t0);

// --- flux threshold bracketing ----------------------------------------------

struct FluxBracket {
    double coincide = 0.0;   // largest probed flux with verdict coincide
    double uncertain = 0.0;  // smallest probed flux without it
    std::vector<std::pair<double, std::string>> trace;
};

FluxBracket phi0_bracket(const FunctionSpaceLayout& layout, CarrierParams params, double lo,
                         double hi, int bisections, const PicardOptions& opts = {},
                         std::uint64_t seed = 1);

// --- combined constants -----------------------------------------------------

struct EmpiricalConstant {
    std::string name;
    double value;
    std::string provenance;
};

struct ConstantsReport {
    double M1 = 0.0;
    double M4 = 0.0;
    double M5 = 0.0;
    double korn_c = 0.0;
    double coercivity_margin = 0.0;  // korn_c / 2 - certified smallness ratio
    std::vector<EmpiricalConstant> empirical_C;
};

// M5 over the standard battery {x1, x2, x1 x2, sin(pi x1), sin(pi x2)}
// (mean-subtracted) on a FullDirichlet slab layout.
double bogovskii_battery(const FunctionSpaceLayout& layout);

// Discretely solenoidal random slip fields (augmented-Lagrangian projection
// of Gaussian coefficients onto the pointwise divergence-free subspace).
std::vector<Vector> random_solenoidal_fields(const FunctionSpaceLayout& layout, int count,
                                             std::uint64_t seed = 1);

// max over the fields of the carrier smallness ratio at these cutoffs
double smallness_certificate(const CarrierParams& params, const FunctionSpaceLayout& layout,
                             const std::vector<Vector>& fields);

}  // namespace channel
