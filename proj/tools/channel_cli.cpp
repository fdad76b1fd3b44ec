// Batch front door: parse a config, run one command, write CSV/VTK reports.
//
// Exit codes: 0 pass, 1 validation error, 2 solver/numerical failure,
// 3 invariant violation.

#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "channel/analysis.hpp"
#include "channel/config.hpp"
#include "channel/report.hpp"

namespace fs = std::filesystem;
using namespace channel;

namespace {

struct Ctx {
    RunConfig cfg;
    fs::path out;

    std::string path(const std::string& name) const { return (out / name).string(); }
};

std::string yes_no(bool b) { return b ? "pass" : "FAIL"; }

int cmd_verify_carrier(const Ctx& ctx) {
    const CarrierReport rep = verify_carrier(ctx.cfg.carrier());
    std::vector<CsvRow> rows;
    for (const auto& r : rep.rows())
        rows.push_back({r.name, fmt17(r.value), fmt17(r.tolerance), r.pass ? "pass" : "fail"});
    write_csv(ctx.path("carrier_report.csv"), {"check", "value", "tolerance", "status"}, rows);
    write_manifest(ctx.path("manifest.txt"), "verify-carrier", ctx.cfg,
                   {{"all_pass", rep.all_pass() ? "true" : "false"},
                    {"carrier_energy", fmt17(rep.energy)}});
    for (const auto& r : rep.rows())
        std::cout << r.name << ": " << fmt17(r.value) << " (tol " << fmt17(r.tolerance) << ") "
                  << yes_no(r.pass) << "\n";
    if (!rep.all_pass()) throw InvariantError("verify-carrier: at least one check failed");
    return 0;
}

SolutionBundle run_solve(const Ctx& ctx, const FunctionSpaceLayout& layout) {
    return picard_solve(layout, ctx.cfg.carrier(), ctx.cfg.solver);
}

int cmd_solve(const Ctx& ctx) {
    const auto mesh = build_mesh(ctx.cfg.geometry, ctx.cfg.T, ctx.cfg.h);
    const auto layout = build_spaces(mesh);
    const SolutionBundle sol = run_solve(ctx, layout);

    std::vector<CsvRow> rows;
    for (const auto& it : sol.history)
        rows.push_back({std::to_string(it.iteration), fmt17(it.residual), fmt17(it.increment),
                        fmt17(it.damping)});
    write_csv(ctx.path("iterations.csv"), {"iteration", "residual", "increment", "damping"},
              rows);
    write_vtk(ctx.path("solution.vtk"), sol);

    const FieldNorms norms = velocity_norms(layout, sol.full_velocity());
    write_manifest(ctx.path("manifest.txt"), "solve", ctx.cfg,
                   {{"iterations", std::to_string(sol.history.size())},
                    {"perturbation_h1_semi", fmt17(norms.h1_semi)},
                    {"perturbation_l2", fmt17(norms.l2)},
                    {"pressure_l2", fmt17(pressure_l2(layout, sol.p))}});
    std::cout << "converged in " << sol.history.size() << " iterations, ||grad v|| = "
              << fmt17(norms.h1_semi) << "\n";
    return 0;
}

int cmd_constants(const Ctx& ctx) {
    const auto mesh = build_mesh(ctx.cfg.geometry, ctx.cfg.T, ctx.cfg.h);
    const auto layout = build_spaces(mesh);

    const EigenEstimate m1 = poincare_constant(layout);
    const EigenEstimate korn = korn_constant(layout);
    const EmbeddingEstimate m4 =
        embedding_bound(layout, ctx.cfg.constants_samples, ctx.cfg.seed);

    const auto slab_mesh =
        build_mesh(ChannelGeometry::straight(), 0.5, std::min(ctx.cfg.h, 0.25));
    const auto slab = build_spaces(slab_mesh, SpaceKind::FullDirichlet);
    const double m5 = bogovskii_battery(slab);

    double margin = korn.value / 2.0;
    double ratio = 0.0;
    if (ctx.cfg.flux != 0.0) {
        const auto fields =
            random_solenoidal_fields(layout, ctx.cfg.constants_samples, ctx.cfg.seed);
        ratio = smallness_certificate(ctx.cfg.carrier(), layout, fields);
        margin = korn.value / 2.0 - ratio;
    }

    std::vector<CsvRow> rows = {
        {"M1_poincare", fmt17(m1.value), "eigenvalue"},
        {"korn_c", fmt17(korn.value), "eigenvalue"},
        {"M4_embedding", fmt17(m4.value), "sampled-lower-bound"},
        {"M5_bogovskii", fmt17(m5), "constrained-solve-battery"},
        {"smallness_ratio", fmt17(ratio), "certified-max-over-samples"},
        {"coercivity_margin", fmt17(margin), "korn_c/2 - smallness_ratio"},
    };
    write_csv(ctx.path("constants.csv"), {"name", "value", "provenance"}, rows);
    write_manifest(ctx.path("manifest.txt"), "constants", ctx.cfg,
                   {{"samples", std::to_string(ctx.cfg.constants_samples)}});
    for (const auto& r : rows) std::cout << r[0] << " = " << r[1] << "\n";
    if (margin <= 0.0)
        throw InvariantError("constants: coercivity margin is not positive at these cutoffs");
    return 0;
}

std::vector<double> decay_grid(double T) {
    std::vector<double> t;
    for (double s = 1.0; s <= T + 1e-12; s += 0.25) t.push_back(std::min(s, T));
    return t;
}

int cmd_decay(const Ctx& ctx) {
    const auto mesh = build_mesh(ctx.cfg.geometry, ctx.cfg.T, ctx.cfg.h);
    const auto layout = build_spaces(mesh);
    const SolutionBundle sol = run_solve(ctx, layout);
    const DecayReport rep = decay_profile(sol, decay_grid(ctx.cfg.T));

    std::vector<CsvRow> rows;
    for (size_t k = 0; k < rep.t_grid.size(); ++k)
        rows.push_back({fmt17(rep.t_grid[k]), fmt17(rep.y_plus[k]), fmt17(rep.dy_plus[k]),
                        fmt17(rep.y_minus[k])});
    write_csv(ctx.path("decay.csv"), {"t", "y_plus", "dy_plus", "y_minus"}, rows);
    write_manifest(ctx.path("manifest.txt"), "decay", ctx.cfg,
                   {{"fitted_rate", fmt17(rep.fitted_rate)},
                    {"r_squared", fmt17(rep.r_squared)},
                    {"C4_empirical", fmt17(rep.C4_empirical)},
                    {"fit_window", fmt17(rep.fit_window[0]) + " " + fmt17(rep.fit_window[1])},
                    {"exact_zero", rep.exact_zero ? "true" : "false"}});
    std::cout << "fitted decay rate " << fmt17(rep.fitted_rate) << " (r^2 "
              << fmt17(rep.r_squared) << "), C4 = " << fmt17(rep.C4_empirical) << "\n";
    if (!rep.exact_zero && !(rep.fitted_rate > 0.0))
        throw InvariantError("decay: fitted rate is not positive");
    return 0;
}

int cmd_growth(const Ctx& ctx) {
    const auto mesh = build_mesh(ctx.cfg.geometry, ctx.cfg.T, ctx.cfg.h);
    const auto layout = build_spaces(mesh);
    const SolutionBundle sol = run_solve(ctx, layout);

    std::vector<double> t;
    for (double s = 1.5; s <= ctx.cfg.T + 1e-12; s += 0.5) t.push_back(std::min(s, ctx.cfg.T));
    const GrowthReport rep = growth_profile(sol, t);

    std::vector<CsvRow> rows;
    for (size_t k = 0; k < rep.t_grid.size(); ++k)
        rows.push_back({fmt17(rep.t_grid[k]), fmt17(rep.slab_h1[k]), fmt17(rep.slab_l4[k]),
                        fmt17(rep.cumulative[k])});
    write_csv(ctx.path("growth.csv"), {"t", "slab_h1", "slab_l4", "cumulative_grad"}, rows);
    write_manifest(ctx.path("manifest.txt"), "growth", ctx.cfg,
                   {{"C6_empirical", fmt17(rep.C6_empirical)}});
    std::cout << "C6 = " << fmt17(rep.C6_empirical) << "\n";
    if (!std::isfinite(rep.C6_empirical))
        throw InvariantError("growth: growth constant is not finite");
    return 0;
}

int cmd_probe(const Ctx& ctx) {
    const auto mesh = build_mesh(ctx.cfg.geometry, ctx.cfg.T, ctx.cfg.h);
    const auto layout = build_spaces(mesh);
    auto starts = standard_starts(layout, ctx.cfg.carrier(), ctx.cfg.seed);
    starts.resize(static_cast<size_t>(ctx.cfg.probe_starts));
    const ProbeReport rep = uniqueness_probe(layout, ctx.cfg.carrier(), starts, ctx.cfg.solver);

    std::vector<CsvRow> rows;
    for (size_t i = 0; i < rep.distances.size(); ++i)
        for (size_t j = i + 1; j < rep.distances.size(); ++j)
            rows.push_back({std::to_string(i), std::to_string(j),
                            fmt17(rep.distances[i][j])});
    write_csv(ctx.path("probe_distances.csv"), {"start_i", "start_j", "h1_distance"}, rows);
    rows.clear();
    for (size_t k = 0; k < rep.t_grid.size(); ++k)
        rows.push_back({fmt17(rep.t_grid[k]), fmt17(rep.y_diff[k])});
    write_csv(ctx.path("probe_growth.csv"), {"t", "y_diff"}, rows);
    write_manifest(ctx.path("manifest.txt"), "probe-uniqueness", ctx.cfg,
                   {{"verdict", rep.verdict},
                    {"max_distance", fmt17(rep.max_distance)},
                    {"contraction_estimate", fmt17(rep.contraction_estimate)},
                    {"tail_normalized", fmt17(rep.tail_normalized)}});
    std::cout << "verdict: " << rep.verdict << " (max distance " << fmt17(rep.max_distance)
              << ")\n";
    if (rep.verdict == "inconclusive")
        throw SolverError("probe-uniqueness: at least one start did not converge");
    if (rep.verdict != "coincide")
        throw InvariantError("probe-uniqueness: starts converged to distinct solutions");
    return 0;
}

int cmd_mms(const Ctx& ctx) {
    const MmsResult res = mms_convergence(ctx.cfg.mms_refinements, ctx.cfg.mms_h0, ctx.cfg.T);
    std::vector<CsvRow> rows;
    for (size_t k = 0; k < res.h.size(); ++k)
        rows.push_back(
            {fmt17(res.h[k]), fmt17(res.vel_h1_error[k]), fmt17(res.pressure_l2_error[k])});
    write_csv(ctx.path("mms.csv"), {"h", "vel_h1_error", "pressure_l2_error"}, rows);
    write_manifest(ctx.path("manifest.txt"), "mms-convergence", ctx.cfg,
                   {{"vel_order", fmt17(res.vel_order)},
                    {"pressure_order", fmt17(res.pressure_order)}});
    std::cout << "H1 velocity order " << fmt17(res.vel_order) << ", L2 pressure order "
              << fmt17(res.pressure_order) << "\n";
    if (std::abs(res.vel_order - 2.0) > 0.3 || std::abs(res.pressure_order - 2.0) > 0.5)
        throw InvariantError("mms-convergence: observed orders are out of band");
    return 0;
}

int cmd_certify(const Ctx& ctx) {
    const auto mesh = build_mesh(ctx.cfg.geometry, ctx.cfg.T, ctx.cfg.h);
    const auto layout = build_spaces(mesh);
    const double c = korn_constant(layout).value;
    const auto fields =
        random_solenoidal_fields(layout, ctx.cfg.certify_samples, ctx.cfg.seed);

    std::vector<CsvRow> rows;
    double best_eps = 0.0, best_dist = 0.0;
    bool found = false;
    for (double eps : ctx.cfg.certify_epsilon_grid)
        for (double dist : ctx.cfg.certify_dist_grid) {
            CarrierParams p = ctx.cfg.carrier();
            p.cutoffs.epsilon = eps;
            p.cutoffs.dist = dist;
            const double ratio = smallness_certificate(p, layout, fields);
            const bool pass = ratio <= c / 2.0;
            rows.push_back({fmt17(eps), fmt17(dist), fmt17(ratio), fmt17(c / 2.0),
                            pass ? "pass" : "fail"});
            if (pass && !found) {
                found = true;
                best_eps = eps;
                best_dist = dist;
            }
        }
    write_csv(ctx.path("certify.csv"), {"epsilon", "dist", "max_ratio", "bound", "status"},
              rows);
    write_manifest(ctx.path("manifest.txt"), "certify", ctx.cfg,
                   {{"korn_c", fmt17(c)},
                    {"samples", std::to_string(ctx.cfg.certify_samples)},
                    {"chosen_epsilon", found ? fmt17(best_eps) : "none"},
                    {"chosen_dist", found ? fmt17(best_dist) : "none"}});
    for (const auto& r : rows)
        std::cout << "eps " << r[0] << ", dist " << r[1] << ": ratio " << r[2] << " vs bound "
                  << r[3] << " -> " << r[4] << "\n";
    if (!found)
        throw InvariantError("certify: no grid point satisfies the smallness bound c/2");
    std::cout << "chosen epsilon = " << fmt17(best_eps) << ", dist = " << fmt17(best_dist)
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"steady channel flow: solver, constants, and diagnostics"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_override;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"verify-carrier", "check the flux carrier pointwise and in the mean"},
        {"solve", "run the nonlinear solve and write fields"},
        {"constants", "compute the inequality constants"},
        {"decay", "solve and profile the truncated-energy decay"},
        {"growth", "solve and profile slab/cumulative growth"},
        {"probe-uniqueness", "solve from several starts and compare"},
        {"mms-convergence", "manufactured-solution convergence study"},
        {"certify", "sweep cutoffs for the smallness certificate"},
    };
    for (const auto& [name, desc] : commands) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("-c,--config", config_path, "configuration file")->required();
        sub->add_option("-o,--output", output_override, "output directory override");
    }
    CLI11_PARSE(app, argc, argv);

    try {
        Ctx ctx;
        ctx.cfg = parse_config_file(config_path);
        if (!output_override.empty()) ctx.cfg.output_dir = output_override;
        ctx.out = ctx.cfg.output_dir;
        fs::create_directories(ctx.out);

        const std::string cmd = app.get_subcommands().front()->get_name();
        if (cmd == "verify-carrier") return cmd_verify_carrier(ctx);
        if (cmd == "solve") return cmd_solve(ctx);
        if (cmd == "constants") return cmd_constants(ctx);
        if (cmd == "decay") return cmd_decay(ctx);
        if (cmd == "growth") return cmd_growth(ctx);
        if (cmd == "probe-uniqueness") return cmd_probe(ctx);
        if (cmd == "mms-convergence") return cmd_mms(ctx);
        if (cmd == "certify") return cmd_certify(ctx);
        return 1;  // unreachable
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
