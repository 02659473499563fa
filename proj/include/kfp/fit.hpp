#pragma once

#include "kfp/dataset.hpp"
#include "kfp/pathway.hpp"
#include "kfp/posterior.hpp"
#include "kfp/sampler.hpp"
#include "kfp/stats.hpp"

#include <optional>
#include <string>
#include <vector>

namespace kfp {

struct ParamSummary {
    std::string name;
    double mode = 0.0;
    Interval ci; // central 95%
    double rhat = 0.0;
    double ess = 0.0;
};

struct PosteriorResult {
    std::vector<std::string> names;
    std::vector<Eigen::MatrixXd> chains; // constrained draws per chain
    std::vector<ParamSummary> summaries;
    bool converged = false; // all split R-hat < 1.05
    int divergences = 0;
    double mean_accept = 0.0;
    std::vector<double> step_sizes;

    std::vector<double> pooled(int param) const;
    const ParamSummary& summary(const std::string& name) const;
};

struct FitConfig {
    SamplerConfig sampler;
    SigmaMode sigma = SigmaMode::infer();
};

inline constexpr double kRhatThreshold = 1.05;

// End-to-end inference: build the model template from the graph (with
// turnover rates derived from x_total when given), sample, summarize.
// prior = nullptr picks the defaults.
PosteriorResult fit(const PathwayGraph& g, const Dataset& data,
                    const std::optional<Eigen::VectorXd>& x_total,
                    const PriorSpec* prior, const FitConfig& cfg);

// Summaries for an already-sampled posterior (exposed for reuse).
PosteriorResult summarize_chains(std::vector<std::string> names,
                                 std::vector<ChainOutput> chains);

} // namespace kfp
