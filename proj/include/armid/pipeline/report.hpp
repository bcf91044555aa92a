#pragma once

#include <filesystem>
#include <string>

#include "armid/pipeline/pipeline.hpp"

namespace armid::pipeline {

/// Dataset grid: seq_len, stride, ssr, effective time, utilization, val R²/RMSE.
std::string dataset_table(const RunReport& report);
/// Architecture grid: layers, heads, embedding dim, val R²/RMSE.
std::string architecture_table(const RunReport& report);
/// Per-joint Coulomb and viscous friction R²/RMSE of one cell.
std::string friction_table(const CellResult& cell);
/// Per-link mass and COM R²/RMSE of one cell.
std::string mass_com_table(const CellResult& cell);
/// Per-link Ixx/Iyy/Izz R²/RMSE of one cell; parameters that are not
/// identifiable print "-", missing metrics "n/a".
std::string inertia_table(const CellResult& cell);

/// Index of the cell with the best validation mean R², or -1.
int best_cell(const RunReport& report);

/// Writes the five tables as text files plus report.json into `dir`.
void emit_tables(const RunReport& report, const std::filesystem::path& dir);

std::string report_to_json(const RunReport& report);

}  // namespace armid::pipeline
