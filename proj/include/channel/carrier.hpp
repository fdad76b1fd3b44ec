#pragma once

#include <functional>
#include <string>
#include <vector>

#include "channel/assembly.hpp"
#include "channel/cutoffs.hpp"
#include "channel/geometry.hpp"

namespace channel {

struct CutoffParams {
    double epsilon = 0.5;   // wall-layer thickness
    double dist = 0.0;      // transition offset d > L
    bool mollified_pi = false;
};

struct CarrierParams {
    double flux = 0.0;
    CutoffParams cutoffs;
    ChannelGeometry geom = ChannelGeometry::straight();

    void validate() const;
    // Resolve "auto" choices: epsilon so the mesh resolves the layer, d = 2L.
    static CutoffParams default_policy(const ChannelGeometry& geom, double h);
};

// The explicit flux carrier: a solenoidal field carrying flux Phi, matching
// the slip conditions on the walls, and equal to (Phi/2, 0) for
// |x1| >= 7d/4. Built from the layer stream function G = Phi * mu(f2 - x2)
// and the axial transition pi.
class CarrierField {
public:
    explicit CarrierField(const CarrierParams& params);

    const CarrierParams& params() const { return params_; }

    struct StreamData {
        double G;
        Vec2 dG;
        double d11, d12, d22;  // Hessian of G
    };
    StreamData stream(const Vec2& x) const;

    Vec2 value(const Vec2& x) const;
    Mat2 grad(const Vec2& x) const;

    // Evaluate with a forced g2 branch (0: |x1| < d rule, 1: outer rule);
    // used to check C^1 agreement across the seam |x1| = d.
    Vec2 value_branch(const Vec2& x, int branch) const;
    Mat2 grad_branch(const Vec2& x, int branch) const;

    FlowField flow() const;

    // Exact-ish cross-section flux at station x1 by layer-graded quadrature.
    double station_flux(double x1) const;

    // int |grad g|^2 + |g . grad g|^2 over the support region.
    double energy() const;

private:
    void check_domain(const Vec2& x) const;
    CarrierParams params_;
};

struct CarrierCheckRow {
    std::string name;
    double value;
    double tolerance;
    bool pass;
};

struct CarrierReport {
    double max_div = 0.0;
    double max_normal_flux = 0.0;
    double max_slip_stress = 0.0;
    std::vector<std::pair<double, double>> flux_errors;  // station, |flux - Phi|
    double far_field_error = 0.0;
    double max_seam_jump = 0.0;
    double energy = 0.0;
    double mu_bound_factor = 0.0;  // max(-mu' t)/eps over a dense grid
    bool resolution_warning = false;
    std::vector<CarrierCheckRow> rows() const;
    bool all_pass() const;
};

struct SamplingSpec {
    int n_x1 = 200;
    int n_x2 = 80;
};

CarrierReport verify_carrier(const CarrierParams& params, const SamplingSpec& sampling = {});

// Scalar test field for the Hardy-type layer inequality.
struct ScalarField {
    std::function<double(const Vec2&)> value;
    std::function<double(const Vec2&)> d2;  // partial w / partial x2
};

// (int w^2 |d2 G|^2) / (Phi^2 eps^2 int |d2 w|^2) over |x1| <= half_length.
double hardy_ratio(const CarrierParams& params, const ScalarField& w, double half_length);

// |int v . grad g . v| / ||grad v||^2 for a discrete solenoidal slip field,
// evaluated through the integrated-by-parts representation (stable for
// small eps, where the raw integrand suffers catastrophic cancellation).
double smallness_ratio(const CarrierParams& params, const FunctionSpaceLayout& layout,
                       const Vector& v_reduced);

// Shared layer-aware quadrature: integrate f over the channel strip
// |x1| <= x_max with grading across the mu-layer near the upper wall.
double integrate_layer_aware(const CarrierParams& params, double x_max,
                             const std::function<double(const Vec2&)>& f);

}  // namespace channel
