#include "channel/report.hpp"

#include <cstdio>
#include <fstream>

#include "channel/carrier.hpp"

namespace channel {

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write file: " + path);
    return out;
}

void write_row(std::ofstream& out, const CsvRow& row) {
    for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
}

}  // namespace

void write_csv(const std::string& path, const CsvRow& header,
               const std::vector<CsvRow>& rows) {
    auto out = open_out(path);
    write_row(out, header);
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw ValidationError("csv row width mismatch in " + path);
        write_row(out, row);
    }
}

void write_manifest(const std::string& path, const std::string& command, const RunConfig& cfg,
                    const std::vector<std::pair<std::string, std::string>>& extra) {
    auto out = open_out(path);
    out << "command = " << command << "\n";
    out << "profile = "
        << (cfg.geometry.family() == ProfileFamily::Bump ? "bump" : "straight") << "\n";
    out << "amplitude = " << fmt17(cfg.geometry.amplitude()) << "\n";
    out << "support = " << fmt17(cfg.geometry.straight_from()) << "\n";
    out << "flux = " << fmt17(cfg.flux) << "\n";
    out << "epsilon = " << fmt17(cfg.cutoffs.epsilon)
        << (cfg.epsilon_auto ? "  # auto" : "") << "\n";
    out << "dist = " << fmt17(cfg.cutoffs.dist) << (cfg.dist_auto ? "  # auto" : "") << "\n";
    out << "mollified_pi = " << (cfg.cutoffs.mollified_pi ? "true" : "false") << "\n";
    out << "T = " << fmt17(cfg.T) << "\n";
    out << "h = " << fmt17(cfg.h) << "\n";
    out << "tolerance = " << fmt17(cfg.solver.tolerance) << "\n";
    out << "max_iterations = " << cfg.solver.max_iterations << "\n";
    out << "damping = " << fmt17(cfg.solver.initial_damping) << "\n";
    out << "min_damping = " << fmt17(cfg.solver.min_damping) << "\n";
    out << "oseen = " << (cfg.solver.oseen_update ? "true" : "false") << "\n";
    out << "quad_degree = " << cfg.solver.quad_degree << "\n";
    out << "seed = " << cfg.seed << "\n";
    for (const auto& [k, v] : extra) out << k << " = " << v << "\n";
}

void write_vtk(const std::string& path, const SolutionBundle& sol) {
    const FunctionSpaceLayout& layout = *sol.layout;
    const TruncatedMesh& mesh = *layout.mesh;
    const int nv = layout.n_vertices;
    const Vector full = sol.full_velocity();
    const CarrierField g(sol.params);

    auto out = open_out(path);
    out << "# vtk DataFile Version 3.0\n";
    out << "steady channel flow\n";
    out << "ASCII\n";
    out << "DATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << nv << " double\n";
    for (int i = 0; i < nv; ++i)
        out << fmt17(mesh.nodes[i].x) << " " << fmt17(mesh.nodes[i].y) << " 0\n";
    out << "CELLS " << mesh.cells.size() << " " << 4 * mesh.cells.size() << "\n";
    for (const auto& c : mesh.cells) out << "3 " << c[0] << " " << c[1] << " " << c[2] << "\n";
    out << "CELL_TYPES " << mesh.cells.size() << "\n";
    for (size_t c = 0; c < mesh.cells.size(); ++c) out << "5\n";

    out << "POINT_DATA " << nv << "\n";
    out << "VECTORS velocity double\n";
    std::vector<Vec2> gv(nv);
    for (int i = 0; i < nv; ++i) {
        gv[i] = g.value(mesh.nodes[i]);
        out << fmt17(gv[i].x + full[2 * i]) << " " << fmt17(gv[i].y + full[2 * i + 1]) << " 0\n";
    }
    out << "SCALARS pressure double 1\n";
    out << "LOOKUP_TABLE default\n";
    for (int i = 0; i < nv; ++i) out << fmt17(sol.p[i]) << "\n";
    out << "VECTORS carrier double\n";
    for (int i = 0; i < nv; ++i) out << fmt17(gv[i].x) << " " << fmt17(gv[i].y) << " 0\n";
    out << "VECTORS perturbation double\n";
    for (int i = 0; i < nv; ++i)
        out << fmt17(full[2 * i]) << " " << fmt17(full[2 * i + 1]) << " 0\n";
}

}  // namespace channel
