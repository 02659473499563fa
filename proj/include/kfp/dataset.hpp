#pragma once

#include "kfp/compile.hpp"
#include "kfp/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace kfp {

struct NoiseSpec {
    double relative_sd = 0.025;
    int replicates = 3;
    std::uint64_t seed = 0;
};

// Dense measurement grid: every (time, node) cell holds the same number of
// replicate values.
struct Dataset {
    Eigen::VectorXd times; // strictly positive, ascending
    std::vector<std::string> nodes;
    int replicates = 0;
    std::vector<double> values; // time-major, then node, then replicate

    int n_times() const { return static_cast<int>(times.size()); }
    int n_nodes() const { return static_cast<int>(nodes.size()); }
    double& at(int t, int i, int r) {
        return values[(static_cast<std::size_t>(t) * nodes.size() + i) * replicates + r];
    }
    double at(int t, int i, int r) const {
        return values[(static_cast<std::size_t>(t) * nodes.size() + i) * replicates + r];
    }

    std::optional<ScaledModel> truth;
    std::optional<NoiseSpec> noise;
};

// Noisy draws around the exact solution at n_points evenly spaced times in
// (0, t_max]: value = truth * (1 + relative_sd * z). Draw order is fixed
// (time, then node, then replicate), so a seed pins the dataset bit for bit.
Dataset gen_dataset(const ScaledModel& m, int n_points, double t_max,
                    const NoiseSpec& noise);

// Same, at caller-chosen times (strictly positive, ascending).
Dataset gen_dataset_at(const ScaledModel& m, const Eigen::VectorXd& times,
                       const NoiseSpec& noise);

// CSV with header time,node,replicate,value; 17 significant digits.
void write_dataset_csv(std::ostream& out, const Dataset& d);
void write_dataset_csv(const std::string& path, const Dataset& d);

struct LoadReport {
    int rows = 0;
    int negative_values = 0; // accepted, but worth flagging
    double min_value = 0.0;
};

// Strict reader: malformed rows, duplicate cells, and incomplete grids are
// FormatErrors that name the offending row or cell. Negative values are
// accepted and counted in the report.
Dataset read_dataset_csv(std::istream& in, LoadReport* report = nullptr);
Dataset read_dataset_csv(const std::string& path, LoadReport* report = nullptr);

} // namespace kfp
