#pragma once

// Shared fixtures, closed-form oracles, and random-model generators for the
// test suite. Everything here is deliberately independent of the library
// internals it checks: steady states come from hand-derived formulas, ranks
// from a local row reduction, trajectories from scalar calculus.

#include "kfp/compile.hpp"
#include "kfp/pathway.hpp"
#include "kfp/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ts {

// ----------------------------------------------------------- fixed fixtures

// Three-pool cycle, ten reactions; every node has one exit.
inline const char* kCycleJson = R"({
  "metabolites": ["X1", "X2", "X3"],
  "edges": [
    {"id": "f1", "kind": "labeled_in", "target": "X1", "flux": 0.32},
    {"id": "f2", "kind": "unlabeled_in", "target": "X1", "flux": 0.25},
    {"id": "f3", "kind": "exit", "source": "X1", "flux": 0.47},
    {"id": "f4", "kind": "internal", "source": "X1", "target": "X2", "flux": 0.5},
    {"id": "f5", "kind": "unlabeled_in", "target": "X2", "flux": 0.45},
    {"id": "f6", "kind": "exit", "source": "X2", "flux": 0.35},
    {"id": "f7", "kind": "internal", "source": "X2", "target": "X3", "flux": 0.6},
    {"id": "f8", "kind": "unlabeled_in", "target": "X3", "flux": 0.25},
    {"id": "f9", "kind": "exit", "source": "X3", "flux": 0.45},
    {"id": "f10", "kind": "internal", "source": "X3", "target": "X1", "flux": 0.4}
  ]
})";

// Irreversible two-pool chain with unit throughput everywhere.
inline const char* kChainJson = R"({
  "metabolites": ["X1", "X2"],
  "edges": [
    {"id": "f1", "kind": "labeled_in", "target": "X1", "flux": 0.75},
    {"id": "f2", "kind": "unlabeled_in", "target": "X1", "flux": 0.25},
    {"id": "f3", "kind": "exit", "source": "X1", "flux": 0.4},
    {"id": "f4", "kind": "internal", "source": "X1", "target": "X2", "flux": 0.6},
    {"id": "f5", "kind": "unlabeled_in", "target": "X2", "flux": 0.4},
    {"id": "f6", "kind": "exit", "source": "X2", "flux": 1.0}
  ]
})";

// Reversible two-pool exchange with unit throughput everywhere.
inline const char* kExchangeJson = R"({
  "metabolites": ["X1", "X2"],
  "edges": [
    {"id": "f1", "kind": "labeled_in", "target": "X1", "flux": 0.55},
    {"id": "f2", "kind": "unlabeled_in", "target": "X1", "flux": 0.3},
    {"id": "f3", "kind": "exit", "source": "X1", "flux": 0.25},
    {"id": "f4", "kind": "internal", "source": "X1", "target": "X2", "flux": 0.75},
    {"id": "f5", "kind": "unlabeled_in", "target": "X2", "flux": 0.25},
    {"id": "f6", "kind": "internal", "source": "X2", "target": "X1", "flux": 0.15},
    {"id": "f7", "kind": "exit", "source": "X2", "flux": 0.85}
  ]
})";

inline kfp::PathwayGraph cycle_graph() { return kfp::parse_pathway(kCycleJson); }
inline kfp::PathwayGraph chain_graph() { return kfp::parse_pathway(kChainJson); }
inline kfp::PathwayGraph exchange_graph() {
    return kfp::parse_pathway(kExchangeJson);
}

// concentrations that give the chain k = (7/20, 3/10)
inline Eigen::Vector2d chain_x_total() {
    return Eigen::Vector2d(20.0 / 7.0, 10.0 / 3.0);
}

// ------------------------------------------------------- closed-form oracles

// Steady state of the irreversible chain: (a1, a1 - a1 a2 + a2).
inline Eigen::Vector2d chain_ss(double a1, double a2) {
    return Eigen::Vector2d(a1, a1 - a1 * a2 + a2);
}

// Steady state of the reversible exchange.
inline Eigen::Vector2d exchange_ss(double a1, double a2, double b12) {
    const double denom = 1.0 - b12 * (1.0 - a2);
    return Eigen::Vector2d((a1 + b12 * a2) / denom,
                           (a1 - a1 * a2 + a2) / denom);
}

// Labeled-fraction trajectory of the chain, from the scalar solutions:
// x1' = k1 (a1 - x1), x2' = k2 (b21 x1 + a2 - x2), both starting at 1.
inline Eigen::Vector2d chain_solution(double t, double k1, double k2, double a1,
                                      double a2, double b21) {
    const double x1ss = a1;
    const double x2ss = a1 * b21 + a2; // equals a1 - a1 a2 + a2 when b21 = 1-a2
    const double c1 = 1.0 - x1ss;
    const double x1 = x1ss + c1 * std::exp(-k1 * t);
    // particular response of x2 to the decaying x1 mode (k1 != k2)
    const double c2 = k2 * b21 * c1 / (k2 - k1);
    const double c3 = 1.0 - x2ss - c2;
    const double x2 = x2ss + c2 * std::exp(-k1 * t) + c3 * std::exp(-k2 * t);
    return Eigen::Vector2d(x1, x2);
}

// Rank by Gaussian elimination with partial pivoting; independent of any
// Eigen decomposition used by the library.
inline int row_reduction_rank(Eigen::MatrixXd m, double tol = 1e-9) {
    int rank = 0;
    int row = 0;
    for (int col = 0; col < m.cols() && row < m.rows(); ++col) {
        int pivot = row;
        for (int r = row + 1; r < m.rows(); ++r)
            if (std::abs(m(r, col)) > std::abs(m(pivot, col)))
                pivot = r;
        if (std::abs(m(pivot, col)) <= tol)
            continue;
        m.row(pivot).swap(m.row(row));
        for (int r = row + 1; r < m.rows(); ++r)
            m.row(r) -= m(r, col) / m(row, col) * m.row(row);
        ++rank;
        ++row;
    }
    return rank;
}

// ------------------------------------------------------------ random models

// ScaledModel drawn directly at the scaled level. Row sums obey the balance
// identity by construction: non-labeled rows sum to one exactly, the labeled
// row to strictly less.
inline kfp::ScaledModel random_scaled(kfp::Rng& rng, int n,
                                      double k_ratio_max = 10.0) {
    kfp::ScaledModel m;
    for (int i = 0; i < n; ++i)
        m.names.push_back("X" + std::to_string(i + 1));
    m.labeled = {0};
    m.B = Eigen::MatrixXd::Zero(n, n);
    m.alpha = Eigen::VectorXd::Zero(n);
    m.k = Eigen::VectorXd::Zero(n);

    const double k_lo = 0.05;
    for (int i = 0; i < n; ++i)
        m.k[i] = k_lo * std::pow(k_ratio_max, rng.uniform());

    for (int i = 0; i < n; ++i) {
        std::vector<int> sources;
        for (int j = 0; j < n; ++j)
            if (j != i && rng.uniform() < 0.5)
                sources.push_back(j);
        // raw positive weights for each incoming edge plus the alpha slot
        std::vector<double> w(sources.size() + 1);
        double total = 0.0;
        for (double& x : w)
            total += x = 0.05 + rng.uniform();
        const double row_sum = i == 0 ? 0.1 + 0.85 * rng.uniform() : 1.0;
        double acc = 0.0;
        for (std::size_t s = 0; s < sources.size(); ++s) {
            m.B(i, sources[s]) = row_sum * w[s] / total;
            acc += m.B(i, sources[s]);
        }
        // assign alpha as the exact remainder so the row identity is tight
        m.alpha[i] = row_sum - acc;
    }
    return m;
}

// Options for the graph generator.
struct GraphOptions {
    int max_nodes = 8;
    double extra_edge_prob = 0.25;
    double exit_prob = 0.6;
    double unlabeled_prob = 0.5;
};

// Random valid weighted pathway in exact flux balance. A spanning
// arborescence from the labeled node keeps everything reachable, extra edges
// add cycles, and fluxes come from per-node output proportions so that inflow
// equals outflow by construction.
inline kfp::PathwayGraph random_graph(kfp::Rng& rng, int n,
                                      const GraphOptions& opt = {}) {
    kfp::PathwayGraph g;
    for (int i = 0; i < n; ++i)
        g.nodes.push_back("X" + std::to_string(i + 1));

    std::set<std::pair<int, int>> internal;
    for (int i = 1; i < n; ++i)
        internal.insert({static_cast<int>(rng.below(i)), i});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && rng.uniform() < opt.extra_edge_prob)
                internal.insert({i, j});

    std::vector<bool> exit(n, false);
    for (int i = 0; i < n; ++i)
        exit[i] = rng.uniform() < opt.exit_prob;
    // every node needs an out edge, and every node must drain to an exit
    std::vector<int> out_count(n, 0);
    for (auto [i, j] : internal)
        ++out_count[i];
    for (int i = 0; i < n; ++i)
        if (out_count[i] == 0 && !exit[i])
            exit[i] = true;
    for (;;) {
        // reverse reachability from exit nodes along internal edges
        std::vector<bool> drains = exit;
        bool changed = true;
        while (changed) {
            changed = false;
            for (auto [i, j] : internal)
                if (!drains[i] && drains[j])
                    drains[i] = changed = true;
        }
        int stuck = -1;
        for (int i = 0; i < n; ++i)
            if (!drains[i])
                stuck = i;
        if (stuck < 0)
            break;
        exit[stuck] = true;
    }

    std::vector<bool> unlabeled(n, false);
    for (int i = 0; i < n; ++i)
        unlabeled[i] = rng.uniform() < opt.unlabeled_prob;

    // output proportions per node over (internal out-edges, optional exit)
    Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd exit_prop = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        std::vector<int> outs;
        for (auto [a, b] : internal)
            if (a == i)
                outs.push_back(b);
        std::vector<double> w(outs.size() + (exit[i] ? 1 : 0));
        double total = 0.0;
        for (double& x : w)
            total += x = 0.1 + rng.uniform();
        for (std::size_t s = 0; s < outs.size(); ++s)
            gamma(i, outs[s]) = w[s] / total;
        if (exit[i])
            exit_prop[i] = w.back() / total;
    }

    Eigen::VectorXd entry = Eigen::VectorXd::Zero(n);
    const double labeled_flux = 0.5 + 1.5 * rng.uniform();
    entry[0] += labeled_flux;
    Eigen::VectorXd unlabeled_flux = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i)
        if (unlabeled[i]) {
            unlabeled_flux[i] = 0.1 + 1.4 * rng.uniform();
            entry[i] += unlabeled_flux[i];
        }

    // throughput F solves F = entry + gamma^T F
    const Eigen::MatrixXd lhs =
        Eigen::MatrixXd::Identity(n, n) - gamma.transpose();
    const Eigen::VectorXd f = lhs.partialPivLu().solve(entry);

    int eid = 0;
    auto add = [&](kfp::EdgeKind kind, int src, int tgt, double flux) {
        kfp::Edge e;
        e.id = "f" + std::to_string(++eid);
        e.kind = kind;
        e.source = src;
        e.target = tgt;
        e.flux = flux;
        g.edges.push_back(std::move(e));
    };
    add(kfp::EdgeKind::LabeledIn, -1, 0, labeled_flux);
    for (int i = 0; i < n; ++i)
        if (unlabeled[i])
            add(kfp::EdgeKind::UnlabeledIn, -1, i, unlabeled_flux[i]);
    for (auto [i, j] : internal)
        add(kfp::EdgeKind::Internal, i, j, gamma(i, j) * f[i]);
    for (int i = 0; i < n; ++i)
        if (exit[i])
            add(kfp::EdgeKind::Exit, i, -1, exit_prop[i] * f[i]);
    return g;
}

// Random weighted arborescence rooted at the labeled node, in exact balance,
// with every node carrying an exit so that all alphas stay recoverable.
inline kfp::PathwayGraph random_arborescence(kfp::Rng& rng, int n) {
    kfp::PathwayGraph g;
    for (int i = 0; i < n; ++i)
        g.nodes.push_back("X" + std::to_string(i + 1));

    std::vector<int> parent(n, -1);
    for (int i = 1; i < n; ++i)
        parent[i] = static_cast<int>(rng.below(i));

    // share of each node's outflow routed to each child vs its exit
    Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        std::vector<int> kids;
        for (int j = 1; j < n; ++j)
            if (parent[j] == i)
                kids.push_back(j);
        std::vector<double> w(kids.size() + 1);
        double total = 0.0;
        for (double& x : w)
            total += x = 0.1 + rng.uniform();
        for (std::size_t s = 0; s < kids.size(); ++s)
            gamma(i, kids[s]) = w[s] / total;
    }

    Eigen::VectorXd entry = Eigen::VectorXd::Zero(n);
    const double labeled_flux = 0.5 + rng.uniform();
    entry[0] = labeled_flux;
    Eigen::VectorXd unlabeled_flux = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        unlabeled_flux[i] = 0.05 + rng.uniform();
        entry[i] += unlabeled_flux[i];
    }
    const Eigen::MatrixXd lhs =
        Eigen::MatrixXd::Identity(n, n) - gamma.transpose();
    const Eigen::VectorXd f = lhs.partialPivLu().solve(entry);

    int eid = 0;
    auto add = [&](kfp::EdgeKind kind, int src, int tgt, double flux) {
        kfp::Edge e;
        e.id = "f" + std::to_string(++eid);
        e.kind = kind;
        e.source = src;
        e.target = tgt;
        e.flux = flux;
        g.edges.push_back(std::move(e));
    };
    add(kfp::EdgeKind::LabeledIn, -1, 0, labeled_flux);
    for (int i = 0; i < n; ++i)
        add(kfp::EdgeKind::UnlabeledIn, -1, i, unlabeled_flux[i]);
    for (int j = 1; j < n; ++j)
        add(kfp::EdgeKind::Internal, parent[j], j, gamma(parent[j], j) * f[parent[j]]);
    for (int i = 0; i < n; ++i) {
        double exit_flux = f[i];
        for (int j = 1; j < n; ++j)
            if (parent[j] == i)
                exit_flux -= gamma(i, j) * f[i];
        add(kfp::EdgeKind::Exit, i, -1, exit_flux);
    }
    return g;
}

} // namespace ts
