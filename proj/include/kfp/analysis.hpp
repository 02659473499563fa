#pragma once

#include "kfp/compile.hpp"
#include "kfp/pathway.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace kfp {

// Labeled steady state of the scaled system: the solution of (I - B) x = alpha.
// Does not depend on the turnover rates.
Eigen::VectorXd steady_state(const ScaledModel& m);

// Weak chained diagonal dominance of I - B: every row weakly dominant, at
// least one strictly dominant, and every weak row connected to a strict one
// through nonzero entries. This is the uniqueness certificate for the
// steady state.
struct WcddReport {
    bool ok = false;
    std::vector<int> strict_rows;
    // chains[i]: path i -> ... -> strict row (empty for strict rows themselves)
    std::vector<std::vector<int>> chains;
    std::string reason; // set when !ok
};

WcddReport check_wcdd(const ScaledModel& m);

// Necessary counting condition for steady-state parameter recovery:
// |E_L| + |E_U| + |E_W| <= 2 N.
struct CountingCondition {
    bool ok = false;
    int lhs = 0;
    int rhs = 0;
};

CountingCondition check_ss_condition(const PathwayGraph& g);

// Known ways a steady state can fail to pin down the proportional parameters
// even when the counting condition holds.
struct DegeneracyFlag {
    std::string code; // "zero-alpha" | "pass-through" | "rank-deficient"
    std::vector<std::string> nodes;
    std::string message;
};

struct DegeneracyReport {
    std::vector<DegeneracyFlag> flags;
    int jacobian_rank = 0;
    int n_proportional = 0;
    bool degenerate() const { return !flags.empty(); }
};

// Jacobian of the steady state with respect to the free proportional
// parameters, by forward differences with step 1e-6; rank from the SVD with
// threshold 1e-8 * sigma_max.
DegeneracyReport detect_degenerate_ss(const ScaledModel& m, const PathwayGraph& g);

struct IdentifiabilityReport {
    CountingCondition counting;
    WcddReport wcdd;
    DegeneracyReport degeneracy;
    // "ss-recoverable" | "ss-underdetermined" | "ss-degenerate"
    std::string verdict;
};

IdentifiabilityReport analyze_identifiability(const ScaledModel& m,
                                              const PathwayGraph& g);

// Closed-form recovery of the unlabeled-entry fractions on an arborescence:
// alpha at the root equals its steady state, elsewhere
// alpha_i = (x_i - x_parent) / (1 - x_parent).
Eigen::VectorXd recover_from_arborescence(const PathwayGraph& g,
                                          const Eigen::VectorXd& xbar_ss);

// Time-scale separation. The residual of the fast node's balance row at the
// all-ones initial state decides whether the fast rate is visible in data:
// it vanishes unless the fast node carries the labeled entry.
struct FastSlowReport {
    bool separated = false;
    double ratio = 0.0; // k_max / second largest k
    int fast_node = -1;
    double residual_at_ones = 0.0;
    bool ic_on_slow_manifold = false;
    bool identifiable_fast_rate = false;
    double threshold = 0.0;
};

inline constexpr double kFastSlowRatioThreshold = 10.0;

FastSlowReport classify_fast_slow(const ScaledModel& m,
                                  double threshold = kFastSlowRatioThreshold);

// Quasi-equilibrium constraint of the fast node's row:
// sum_i coeffs[i] * x_i + constant = 0.
struct SlowManifold {
    int fast_node = -1;
    Eigen::VectorXd coeffs;
    double constant = 0.0;
};

SlowManifold slow_manifold(const ScaledModel& m);

} // namespace kfp
