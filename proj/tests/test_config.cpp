#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "channel/config.hpp"
#include "channel/report.hpp"
#include "doctest.h"

using namespace channel;

namespace {

std::string error_text(const std::string& cfg) {
    try {
        parse_config(cfg);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return "";
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("minimal config: defaults and auto cutoffs") {
    const auto cfg = parse_config("[flow]\nflux = 0.5\n[mesh]\nT = 10\nh = 0.25\n");
    CHECK(cfg.flux == 0.5);
    CHECK(cfg.T == 10.0);
    CHECK(cfg.h == 0.25);
    CHECK(cfg.geometry.family() == ProfileFamily::Straight);
    CHECK(cfg.epsilon_auto);
    CHECK(cfg.dist_auto);
    CHECK(cfg.cutoffs.epsilon > 0.0);
    CHECK(cfg.cutoffs.epsilon < 1.0);
    CHECK(cfg.cutoffs.dist > cfg.geometry.straight_from());
    // resolved values agree with the policy
    const auto policy = CarrierParams::default_policy(cfg.geometry, cfg.h);
    CHECK(cfg.cutoffs.epsilon == policy.epsilon);
    CHECK(cfg.cutoffs.dist == policy.dist);
    CHECK(cfg.certify_epsilon_grid.size() == 3);
    CHECK(cfg.certify_dist_grid.size() == 2);
}

TEST_CASE("full config round trip") {
    const std::string text =
        "# comment\n"
        "[geometry]\n"
        "profile = bump\n"
        "amplitude = 0.3\n"
        "support = 2\n"
        "[flow]\n"
        "flux = -1.25   ; inline comment\n"
        "epsilon = 0.2\n"
        "dist = 4\n"
        "mollified_pi = true\n"
        "[mesh]\n"
        "T = 12\n"
        "h = 0.125\n"
        "[solver]\n"
        "tolerance = 1e-9\n"
        "max_iterations = 40\n"
        "damping = 0.5\n"
        "min_damping = 0.25\n"
        "oseen = true\n"
        "quad_degree = 8\n"
        "[run]\n"
        "seed = 42\n"
        "output = out/run1\n"
        "[probe]\n"
        "starts = 2\n"
        "[certify]\n"
        "epsilon_grid = 0.4, 0.2\n"
        "dist_grid = 4, 8\n";
    const auto cfg = parse_config(text);
    CHECK(cfg.geometry.family() == ProfileFamily::Bump);
    CHECK(cfg.geometry.amplitude() == 0.3);
    CHECK(cfg.flux == -1.25);
    CHECK_FALSE(cfg.epsilon_auto);
    CHECK(cfg.cutoffs.epsilon == 0.2);
    CHECK(cfg.cutoffs.dist == 4.0);
    CHECK(cfg.cutoffs.mollified_pi);
    CHECK(cfg.solver.tolerance == 1e-9);
    CHECK(cfg.solver.max_iterations == 40);
    CHECK(cfg.solver.initial_damping == 0.5);
    CHECK(cfg.solver.oseen_update);
    CHECK(cfg.solver.quad_degree == 8);
    CHECK(cfg.seed == 42);
    CHECK(cfg.output_dir == "out/run1");
    CHECK(cfg.probe_starts == 2);
    CHECK(cfg.certify_epsilon_grid == std::vector<double>{0.4, 0.2});
    CHECK(cfg.certify_dist_grid == std::vector<double>{4.0, 8.0});
}

TEST_CASE("validation messages name the constraint") {
    const std::string eps = error_text("[flow]\nepsilon = -0.1\n");
    CHECK(eps.find("epsilon") != std::string::npos);
    CHECK(eps.find("(0, 1)") != std::string::npos);

    // T = L is too short
    const std::string t =
        error_text("[geometry]\nprofile = bump\nsupport = 3\n[mesh]\nT = 3\n");
    CHECK(t.find("T >= L + 1") != std::string::npos);
}

TEST_CASE("all problems aggregated into one error") {
    const std::string msg = error_text(
        "[flow]\nepsilon = -0.1\njunk = 1\n[mesh]\nh = -2\n[nosuch]\nx = 1\n");
    CHECK(msg.find("4 problems") != std::string::npos);
    CHECK(msg.find("epsilon") != std::string::npos);
    CHECK(msg.find("junk") != std::string::npos);
    CHECK(msg.find("[mesh] h") != std::string::npos);
    CHECK(msg.find("[nosuch]") != std::string::npos);
}

TEST_CASE("parser rejects malformed input") {
    CHECK(error_text("flux = 1\n").find("outside any") != std::string::npos);
    CHECK(error_text("[flow]\nflux\n").find("key = value") != std::string::npos);
    CHECK(error_text("[flow]\nflux = 1\nflux = 2\n").find("duplicate") != std::string::npos);
    CHECK(error_text("[flow]\nflux = abc\n").find("finite number") != std::string::npos);
    CHECK(error_text("[run]\nseed = -3\n").find("seed") != std::string::npos);
    CHECK(error_text("[flow]\nmollified_pi = maybe\n").find("true/false") !=
          std::string::npos);
    CHECK_THROWS_AS(parse_config_file("/nonexistent/path.cfg"), ValidationError);
}

TEST_CASE("fmt17 round-trips doubles") {
    for (double x : {3.141592653589793, 1.0 / 3.0, 1e-17, -2.2250738585072014e-308, 0.0})
        CHECK(std::stod(fmt17(x)) == x);
}

TEST_CASE("csv, manifest, and vtk writers") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "channel_report_test";
    fs::create_directories(dir);

    const std::string csv = (dir / "t.csv").string();
    write_csv(csv, {"a", "b"}, {{"1", "2"}, {fmt17(0.5), fmt17(-3.0)}});
    CHECK(slurp(csv) == "a,b\n1,2\n0.5,-3\n");
    CHECK_THROWS_AS(write_csv(csv, {"a"}, {{"1", "2"}}), ValidationError);

    auto cfg = parse_config("[flow]\nflux = 0\n[mesh]\nT = 2\nh = 0.5\n");
    const std::string man = (dir / "m.txt").string();
    write_manifest(man, "solve", cfg, {{"note", "x"}});
    const std::string mtext = slurp(man);
    CHECK(mtext.find("command = solve") != std::string::npos);
    CHECK(mtext.find("epsilon = " + fmt17(cfg.cutoffs.epsilon)) != std::string::npos);
    CHECK(mtext.find("seed = 1") != std::string::npos);
    CHECK(mtext.find("note = x") != std::string::npos);

    // zero-flux solve gives a well-formed VTK file
    const auto mesh = build_mesh(cfg.geometry, cfg.T, cfg.h);
    const auto layout = build_spaces(mesh);
    const auto sol = picard_solve(layout, cfg.carrier());
    const std::string vtk = (dir / "s.vtk").string();
    write_vtk(vtk, sol);
    const std::string vtext = slurp(vtk);
    CHECK(vtext.find("# vtk DataFile Version 3.0") == 0);
    CHECK(vtext.find("DATASET UNSTRUCTURED_GRID") != std::string::npos);
    CHECK(vtext.find("POINT_DATA " + std::to_string(layout.n_vertices)) != std::string::npos);
    for (const char* name : {"velocity", "carrier", "perturbation"})
        CHECK(vtext.find(std::string("VECTORS ") + name + " double") != std::string::npos);
    CHECK(vtext.find("SCALARS pressure double 1") != std::string::npos);
}
