#pragma once

#include "kfp/reproduce.hpp"
#include "kfp/simulate.hpp"

#include <string>
#include <vector>

namespace kfp {

// Self-contained SVG line plot of a trajectory (one series per node).
void write_trajectory_svg(const std::string& path, const Trajectory& traj,
                          const std::vector<std::string>& names,
                          const std::string& title);

// Grid of violin+box panels: one row per free parameter, one column per noise
// level, three violins per panel (the point-count protocols), true value as a
// dashed line.
void write_violin_grid_svg(const std::string& path, const FigureRun& run);

// Violin+box summary of a single fit (one violin per parameter).
void write_fit_violins_svg(const std::string& path, const PosteriorResult& res);

} // namespace kfp
