#pragma once

#include <string>
#include <vector>

#include "channel/config.hpp"

namespace channel {

// 17 significant digits: round-trips every double, keeps CSV byte-stable.
std::string fmt17(double x);

using CsvRow = std::vector<std::string>;

void write_csv(const std::string& path, const CsvRow& header, const std::vector<CsvRow>& rows);

// Plain key=value record of every resolved parameter, enough to re-run.
void write_manifest(const std::string& path, const std::string& command, const RunConfig& cfg,
                    const std::vector<std::pair<std::string, std::string>>& extra = {});

// Legacy ASCII VTK unstructured grid with vertex point data:
// velocity (g + v), pressure, carrier (g), perturbation (v).
void write_vtk(const std::string& path, const SolutionBundle& sol);

}  // namespace channel
