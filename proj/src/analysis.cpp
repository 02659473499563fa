#include "kfp/analysis.hpp"

#include "kfp/common.hpp"
#include "kfp/parameters.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace kfp {

Eigen::VectorXd steady_state(const ScaledModel& m) {
    const int n = m.size();
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) - m.B;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    Eigen::VectorXd x = lu.solve(m.alpha);
    // one step of iterative refinement tightens the residual to a few ulps
    x += lu.solve(m.alpha - A * x);
    const double resid = (A * x - m.alpha).cwiseAbs().maxCoeff();
    if (!x.allFinite() || resid > 1e-10 * (1.0 + m.alpha.cwiseAbs().maxCoeff()))
        throw DomainError("steady-state system I - B is singular; the graph "
                          "fails the dominance certificate");
    return x;
}

WcddReport check_wcdd(const ScaledModel& m) {
    const int n = m.size();
    const double tol = 1e-12;
    WcddReport rep;
    rep.chains.assign(n, {});

    std::vector<bool> strict(n, false);
    for (int i = 0; i < n; ++i) {
        double off = 0.0;
        for (int j = 0; j < n; ++j)
            if (j != i)
                off += std::abs(m.B(i, j));
        const double diag = std::abs(1.0 - m.B(i, i));
        const double margin = diag - off;
        if (margin < -tol) {
            rep.ok = false;
            rep.reason = "row " + m.names[i] + " is not weakly dominant";
            return rep;
        }
        if (margin > tol) {
            strict[i] = true;
            rep.strict_rows.push_back(i);
        }
    }
    if (rep.strict_rows.empty()) {
        rep.ok = false;
        rep.reason = "no strictly dominant row";
        return rep;
    }

    // walk edges i -> j (nonzero off-diagonal entries) backwards from the
    // strict rows; parent pointers give the witness chains
    std::vector<int> next(n, -1);
    std::vector<bool> reached = strict;
    std::deque<int> queue(rep.strict_rows.begin(), rep.strict_rows.end());
    while (!queue.empty()) {
        const int j = queue.front();
        queue.pop_front();
        for (int i = 0; i < n; ++i)
            if (!reached[i] && i != j && m.B(i, j) != 0.0) {
                reached[i] = true;
                next[i] = j;
                queue.push_back(i);
            }
    }
    for (int i = 0; i < n; ++i) {
        if (!reached[i]) {
            rep.ok = false;
            rep.reason = "row " + m.names[i] + " has no chain to a strict row";
            return rep;
        }
        if (strict[i])
            continue;
        for (int v = i; v != -1; v = next[v])
            rep.chains[i].push_back(v);
    }
    rep.ok = true;
    return rep;
}

CountingCondition check_ss_condition(const PathwayGraph& g) {
    const EdgeCensus c = edge_census(g);
    CountingCondition cc;
    cc.lhs = c.labeled_in + c.unlabeled_in + c.internal;
    cc.rhs = 2 * c.nodes;
    cc.ok = cc.lhs <= cc.rhs;
    return cc;
}

DegeneracyReport detect_degenerate_ss(const ScaledModel& m, const PathwayGraph& g) {
    DegeneracyReport rep;
    const int n = m.size();

    if ((m.alpha.array() == 0.0).all())
        rep.flags.push_back({"zero-alpha", {},
                             "no unlabeled entry anywhere: the steady state is "
                             "identically zero and carries no information"});

    const std::vector<bool> unlabeled = g.unlabeled_mask();
    std::vector<bool> labeled(n, false);
    for (int t : g.labeled_targets())
        labeled[t] = true;
    std::vector<int> in_count(n, 0);
    for (const Edge& e : g.edges)
        if (e.kind == EdgeKind::Internal)
            ++in_count[e.target];
    for (int i = 0; i < n; ++i)
        if (!labeled[i] && !unlabeled[i] && in_count[i] == 1)
            rep.flags.push_back({"pass-through",
                                 {g.nodes[i]},
                                 "node " + g.nodes[i] +
                                     " only relays a single internal edge; its "
                                     "steady state duplicates its parent's"});

    // numerical rank of d(steady state)/d(proportional parameters)
    ModelTemplate tmpl(g); // no concentrations; k plays no role here
    std::vector<int> prop;
    for (int q = 0; q < tmpl.dim(); ++q)
        if (tmpl.spec().free[q].kind != ParamKind::Turnover)
            prop.push_back(q);
    rep.n_proportional = static_cast<int>(prop.size());
    if (prop.empty())
        return rep;

    const double step = 1e-6;
    Eigen::VectorXd theta0 = tmpl.theta_from(m);
    ScaledModel base;
    if (!tmpl.evaluate(theta0, base))
        throw DomainError("cannot evaluate model at its own parameters");
    const Eigen::VectorXd x0 = steady_state(base);

    Eigen::MatrixXd jac(n, rep.n_proportional);
    for (int c = 0; c < rep.n_proportional; ++c) {
        Eigen::VectorXd theta = theta0;
        theta[prop[c]] += step;
        ScaledModel pert;
        if (!tmpl.evaluate(theta, pert))
            throw DomainError("perturbed model is not evaluable");
        jac.col(c) = (steady_state(pert) - x0) / step;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
    const Eigen::VectorXd sv = svd.singularValues();
    const double cutoff = 1e-8 * sv[0];
    rep.jacobian_rank = static_cast<int>((sv.array() > cutoff).count());
    if (rep.jacobian_rank < rep.n_proportional)
        rep.flags.push_back(
            {"rank-deficient", {},
             "steady-state Jacobian rank " + std::to_string(rep.jacobian_rank) +
                 " is below the " + std::to_string(rep.n_proportional) +
                 " free proportional parameters"});
    return rep;
}

IdentifiabilityReport analyze_identifiability(const ScaledModel& m,
                                              const PathwayGraph& g) {
    IdentifiabilityReport rep;
    rep.counting = check_ss_condition(g);
    rep.wcdd = check_wcdd(m);
    rep.degeneracy = detect_degenerate_ss(m, g);
    if (!rep.counting.ok)
        rep.verdict = "ss-underdetermined";
    else if (!rep.wcdd.ok || rep.degeneracy.degenerate())
        rep.verdict = "ss-degenerate";
    else
        rep.verdict = "ss-recoverable";
    return rep;
}

Eigen::VectorXd recover_from_arborescence(const PathwayGraph& g,
                                          const Eigen::VectorXd& xbar_ss) {
    const std::vector<int> parent = arborescence_parents(g);
    if (parent.empty())
        throw DomainError("graph is not an arborescence");
    const int n = g.size();
    if (xbar_ss.size() != n)
        throw DomainError("steady-state vector has wrong length");
    Eigen::VectorXd alpha(n);
    for (int i = 0; i < n; ++i) {
        if (parent[i] == -1) {
            alpha[i] = xbar_ss[i];
            continue;
        }
        const double xp = xbar_ss[parent[i]];
        if (!(xp < 1.0))
            throw DomainError("parent of " + g.nodes[i] +
                              " is fully unlabeled at steady state; its entry "
                              "fraction is indeterminate");
        alpha[i] = (xbar_ss[i] - xp) / (1.0 - xp);
    }
    return alpha;
}

FastSlowReport classify_fast_slow(const ScaledModel& m, double threshold) {
    if (!m.has_k())
        throw DomainError("fast-slow classification needs turnover rates");
    const int n = m.size();
    if (n < 2)
        throw DomainError("fast-slow classification needs at least two pools");

    FastSlowReport rep;
    rep.threshold = threshold;
    int fast = 0;
    for (int i = 1; i < n; ++i)
        if (m.k[i] > m.k[fast])
            fast = i;
    double second = -1.0;
    for (int i = 0; i < n; ++i)
        if (i != fast)
            second = std::max(second, m.k[i]);
    rep.fast_node = fast;
    rep.ratio = second > 0.0 ? m.k[fast] / second
                             : std::numeric_limits<double>::infinity();
    rep.separated = rep.ratio >= threshold;
    rep.residual_at_ones = m.B.row(fast).sum() - 1.0 + m.alpha[fast];
    rep.ic_on_slow_manifold = std::abs(rep.residual_at_ones) <= 1e-12;
    rep.identifiable_fast_rate = !rep.ic_on_slow_manifold;
    return rep;
}

SlowManifold slow_manifold(const ScaledModel& m) {
    const FastSlowReport fs = classify_fast_slow(m, 0.0);
    SlowManifold sm;
    sm.fast_node = fs.fast_node;
    sm.coeffs = m.B.row(fs.fast_node).transpose();
    sm.coeffs[fs.fast_node] -= 1.0;
    sm.constant = m.alpha[fs.fast_node];
    return sm;
}

} // namespace kfp
