#pragma once

#include <cstdint>
#include <string>

#include "channel/solver.hpp"

namespace channel {

// Everything a batch run needs, parsed from a sectioned key=value file.
// "auto" cutoffs are resolved at parse time (default policy) so that the
// manifest can echo the exact values used.
struct RunConfig {
    ChannelGeometry geometry = ChannelGeometry::straight();
    double flux = 0.5;
    CutoffParams cutoffs;  // resolved (never "auto" after parsing)
    bool epsilon_auto = true;
    bool dist_auto = true;

    double T = 10.0;
    double h = 0.25;

    PicardOptions solver;
    std::uint64_t seed = 1;
    std::string output_dir = ".";

    // command-specific knobs (harmless for commands that ignore them)
    int probe_starts = 3;
    int mms_refinements = 3;
    double mms_h0 = 0.5;
    int certify_samples = 50;
    std::vector<double> certify_epsilon_grid;  // defaults to {0.4, 0.2, 0.1}
    std::vector<double> certify_dist_grid;     // defaults to {2L, 4L}
    int constants_samples = 20;                // random fields for M4 and margin

    CarrierParams carrier() const {
        CarrierParams p;
        p.flux = flux;
        p.cutoffs = cutoffs;
        p.geom = geometry;
        return p;
    }
};

// Parse and validate; throws a single ValidationError listing every problem.
RunConfig parse_config(const std::string& text);
RunConfig parse_config_file(const std::string& path);

}  // namespace channel
