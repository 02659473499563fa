#pragma once

#include "kfp/posterior.hpp"
#include "kfp/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace kfp {

struct SamplerConfig {
    enum Kind { Nuts, RandomWalk } kind = Nuts;
    int chains = 4;
    int warmup = 1000;
    int draws = 1000;
    std::uint64_t seed = 0;
    int max_tree_depth = 10;
    double target_accept = 0.9;
};

struct ChainStats {
    double mean_accept = 0.0;
    int divergences = 0;
    int max_depth_hits = 0;
    double step_size = 0.0;
};

struct ChainOutput {
    Eigen::MatrixXd draws; // draws x dim, constrained scale
    ChainStats stats;
};

// Run one MCMC chain on the posterior. Sampling happens on the unconstrained
// (logit-transformed) scale; returned draws are mapped back to the prior box.
ChainOutput run_chain(const Posterior& post, const SamplerConfig& cfg,
                      std::uint64_t chain_seed);

// All chains, sequentially, with per-chain seeds derived from cfg.seed.
std::vector<ChainOutput> run_chains(const Posterior& post, const SamplerConfig& cfg);

} // namespace kfp
