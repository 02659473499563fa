#pragma once

#include <Eigen/Dense>

#include <vector>

namespace kfp {

// Posterior point estimate: argmax of a Gaussian KDE with Silverman's
// bandwidth on a 512-point grid spanning the sample range. Needs >= 10
// samples; a constant sample returns that constant.
double kde_mode(const std::vector<double>& samples);

// Gaussian KDE evaluated on an arbitrary grid (shared by kde_mode and the
// violin plots).
Eigen::VectorXd kde_density(const std::vector<double>& samples,
                            const Eigen::VectorXd& grid);

double silverman_bandwidth(const std::vector<double>& samples);

// Central credible interval from empirical quantiles with linear
// interpolation. Needs >= 40 samples.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double width() const { return hi - lo; }
};

Interval credible_interval(std::vector<double> samples, double mass = 0.95);

// Empirical quantile (linear interpolation between order statistics).
double quantile(std::vector<double> samples, double q);

// Split-chain potential scale reduction factor; chains holds one vector of
// draws per chain, all the same length. Infinity when the within-chain
// variance vanishes but the chains disagree.
double split_rhat(const std::vector<std::vector<double>>& chains);

// Rank-normalized bulk effective sample size (split chains, Geyer's initial
// monotone sequence).
double ess_bulk(const std::vector<std::vector<double>>& chains);

struct Diagnostics {
    std::vector<double> rhat; // per parameter
    std::vector<double> ess;  // per parameter
};

// draws[c] is a (draws x params) matrix for chain c; needs >= 2 chains.
Diagnostics compute_diagnostics(const std::vector<Eigen::MatrixXd>& draws);

// Two-sided Kolmogorov-Smirnov distance between samples and Uniform(lo, hi).
double ks_uniform(std::vector<double> samples, double lo, double hi);

// Inverse standard normal CDF (used for rank normalization).
double normal_quantile(double p);

} // namespace kfp
