#pragma once

#include "kfp/dataset.hpp"
#include "kfp/fit.hpp"
#include "kfp/pathway.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace kfp {

// Built-in two-pool study fixtures ("fig4", "fig6", "fig8", "fig10"):
// irreversible and reversible exchange at comparable rates, and the two
// fast-slow cases (fast labeled pool, fast downstream pool).
struct FigureFixture {
    std::string id;
    std::string title;
    PathwayGraph graph;    // fluxes filled in
    Eigen::VectorXd x_total;
    ScaledModel truth;
    double t_max = 0.0; // 95% settling of the slowest mode
};

FigureFixture figure_fixture(const std::string& id);
std::vector<std::string> figure_ids();

struct CellSpec {
    int points = 10;
    double noise = 0.025;
    int replicates = 3;
};

struct CellResult {
    CellSpec cell;
    Dataset data;
    PosteriorResult posterior;
};

// One grid cell: synthesize a dataset from the fixture truth and fit it.
// Seeds for the data and the sampler are derived from seed deterministically.
CellResult reproduce_cell(const FigureFixture& fx, const CellSpec& cell,
                          const FitConfig& base, std::uint64_t seed);

struct FigureRun {
    FigureFixture fixture;
    std::vector<std::string> param_names;
    Eigen::VectorXd theta_true;
    std::vector<CellResult> cells; // 3 point counts x 3 noise levels
};

inline const int kGridPoints[3] = {3, 5, 10};
inline const double kGridNoise[3] = {0.025, 0.05, 0.10};

// The full 3x3 measurement protocol grid for one figure.
FigureRun reproduce_figure(const std::string& id, const FitConfig& base,
                           std::uint64_t seed);

} // namespace kfp
