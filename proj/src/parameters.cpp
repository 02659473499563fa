#include "kfp/parameters.hpp"

#include "kfp/common.hpp"

#include <algorithm>
#include <limits>
#include <map>

namespace kfp {

namespace {

std::string k_name(const std::string& node) { return "k_" + node; }
std::string alpha_name(const std::string& node) { return "alpha_" + node; }
std::string beta_name(const std::string& to, const std::string& from) {
    return "beta_" + to + "_" + from;
}

struct Structure {
    std::vector<bool> is_labeled, has_unlabeled, has_exit;
    std::vector<std::vector<int>> beta_support; // row -> ascending source cols
    std::vector<std::vector<int>> out_neigh;    // node -> ascending internal targets
};

Structure scan(const PathwayGraph& g) {
    const int n = g.size();
    Structure s;
    s.is_labeled.assign(n, false);
    for (int t : g.labeled_targets())
        s.is_labeled[t] = true;
    s.has_unlabeled = g.unlabeled_mask();
    s.has_exit = g.exit_mask();
    s.beta_support.assign(n, {});
    s.out_neigh.assign(n, {});
    for (const Edge& e : g.edges)
        if (e.kind == EdgeKind::Internal) {
            s.beta_support[e.target].push_back(e.source);
            s.out_neigh[e.source].push_back(e.target);
        }
    for (auto& v : s.beta_support)
        std::sort(v.begin(), v.end());
    for (auto& v : s.out_neigh)
        std::sort(v.begin(), v.end());
    return s;
}

} // namespace

int ParameterSpec::index_of(const std::string& name) const {
    for (int i = 0; i < dim(); ++i)
        if (free[i].name == name)
            return i;
    return -1;
}

std::vector<std::string> ParameterSpec::names() const {
    std::vector<std::string> out;
    out.reserve(free.size());
    for (const FreeParameter& p : free)
        out.push_back(p.name);
    return out;
}

ParameterSpec free_parameters(const PathwayGraph& g, bool concentrations_available) {
    require_valid(g);
    const int n = g.size();
    const Structure s = scan(g);
    const double inf = std::numeric_limits<double>::infinity();
    ParameterSpec spec;

    for (int i = 0; i < n; ++i) {
        if (!s.has_exit[i] && concentrations_available)
            continue; // derived from downstream balance
        spec.free.push_back({ParamKind::Turnover, i, -1, k_name(g.nodes[i]), 0.0, inf});
    }
    for (int i = 0; i < n; ++i)
        if (s.has_unlabeled[i])
            spec.free.push_back({ParamKind::Alpha, i, -1, alpha_name(g.nodes[i]), 0.0, 1.0});
    for (int i = 0; i < n; ++i) {
        const auto& sup = s.beta_support[i];
        for (std::size_t c = 0; c < sup.size(); ++c) {
            if (!s.is_labeled[i] && c == 0)
                continue; // eliminated by the row-sum identity
            spec.free.push_back({ParamKind::Beta, i, sup[c],
                                 beta_name(g.nodes[i], g.nodes[sup[c]]), 0.0, 1.0});
        }
    }

    // expressions for the eliminated betas
    for (int i = 0; i < n; ++i) {
        const auto& sup = s.beta_support[i];
        if (s.is_labeled[i] || sup.empty())
            continue;
        std::string expr = beta_name(g.nodes[i], g.nodes[sup[0]]) + " = 1";
        if (s.has_unlabeled[i])
            expr += " - " + alpha_name(g.nodes[i]);
        for (std::size_t c = 1; c < sup.size(); ++c)
            expr += " - " + beta_name(g.nodes[i], g.nodes[sup[c]]);
        spec.derived.push_back({beta_name(g.nodes[i], g.nodes[sup[0]]), expr});
    }

    // exit-less turnover rates
    for (int i = 0; i < n; ++i) {
        if (s.has_exit[i])
            continue;
        if (concentrations_available) {
            std::string expr = k_name(g.nodes[i]) + " =";
            bool first = true;
            for (int j : s.out_neigh[i]) {
                expr += first ? " " : " + ";
                expr += beta_name(g.nodes[j], g.nodes[i]) + " * " + k_name(g.nodes[j]) +
                        " * (xT_" + g.nodes[j] + " / xT_" + g.nodes[i] + ")";
                first = false;
            }
            if (first)
                expr += " 0";
            spec.derived.push_back({k_name(g.nodes[i]), expr});
        } else {
            std::string expr = "F_" + g.nodes[i] + " =";
            bool first = true;
            for (int j : s.out_neigh[i]) {
                expr += first ? " " : " + ";
                expr += beta_name(g.nodes[j], g.nodes[i]) + " * F_" + g.nodes[j];
                first = false;
            }
            if (first)
                expr += " 0";
            spec.concentration_dependent.push_back({g.nodes[i], expr});
        }
    }
    return spec;
}

ModelTemplate::ModelTemplate(const PathwayGraph& g, std::optional<Eigen::VectorXd> x_total)
    : n_(g.size()), names_(g.nodes), x_total_(std::move(x_total)) {
    if (x_total_) {
        if (x_total_->size() != n_)
            throw DomainError("x_total needs one concentration per metabolite");
        if ((x_total_->array() <= 0.0).any())
            throw DomainError("total concentrations must be positive");
    }
    const Structure s = scan(g);
    is_labeled_ = s.is_labeled;
    has_unlabeled_ = s.has_unlabeled;
    beta_support_ = s.beta_support;
    labeled_ = g.labeled_targets();
    std::sort(labeled_.begin(), labeled_.end());
    elim_col_.assign(n_, -1);
    for (int i = 0; i < n_; ++i)
        if (!is_labeled_[i] && !beta_support_[i].empty())
            elim_col_[i] = beta_support_[i][0];
    if (x_total_)
        for (int i = 0; i < n_; ++i)
            if (!s.has_exit[i])
                derived_k_.push_back(i);
    spec_ = free_parameters(g, x_total_.has_value());
}

bool ModelTemplate::evaluate(const Eigen::VectorXd& theta, ScaledModel& out) const {
    std::vector<ParamDeriv> unused;
    // cheap enough at these sizes to share one code path
    return evaluate_with_jacobian(theta, out, unused);
}

bool ModelTemplate::evaluate_with_jacobian(const Eigen::VectorXd& theta,
                                           ScaledModel& out,
                                           std::vector<ParamDeriv>& derivs) const {
    const int p = dim();
    if (theta.size() != p)
        throw DomainError("parameter vector has wrong length");

    out.names = names_;
    out.labeled = labeled_;
    out.alpha = Eigen::VectorXd::Zero(n_);
    out.B = Eigen::MatrixXd::Zero(n_, n_);
    out.k = Eigen::VectorXd::Zero(n_);

    derivs.assign(p, {});
    for (ParamDeriv& d : derivs) {
        d.dk = Eigen::VectorXd::Zero(n_);
        d.dalpha = Eigen::VectorXd::Zero(n_);
    }

    for (int q = 0; q < p; ++q) {
        const FreeParameter& fp = spec_.free[q];
        switch (fp.kind) {
        case ParamKind::Turnover:
            out.k[fp.node] = theta[q];
            derivs[q].dk[fp.node] = 1.0;
            break;
        case ParamKind::Alpha:
            out.alpha[fp.node] = theta[q];
            derivs[q].dalpha[fp.node] = 1.0;
            if (elim_col_[fp.node] >= 0)
                derivs[q].dB.emplace_back(fp.node, elim_col_[fp.node], -1.0);
            break;
        case ParamKind::Beta:
            out.B(fp.node, fp.from) = theta[q];
            derivs[q].dB.emplace_back(fp.node, fp.from, 1.0);
            if (elim_col_[fp.node] >= 0)
                derivs[q].dB.emplace_back(fp.node, elim_col_[fp.node], -1.0);
            break;
        }
    }

    // eliminated betas from the row-sum identity
    for (int i = 0; i < n_; ++i) {
        if (elim_col_[i] < 0)
            continue;
        double rest = 0.0;
        for (int j : beta_support_[i])
            if (j != elim_col_[i])
                rest += out.B(i, j);
        out.B(i, elim_col_[i]) = 1.0 - out.alpha[i] - rest;
    }

    if (derived_k_.empty())
        return true;

    // Downstream balance for exit-less nodes: F_i = sum_j beta_{j,i} F_j.
    // Unknowns are the F of the exit-less nodes; everything else is k*xT.
    const int s = static_cast<int>(derived_k_.size());
    const Eigen::VectorXd& xt = *x_total_;
    std::vector<int> pos(n_, -1);
    for (int a = 0; a < s; ++a)
        pos[derived_k_[a]] = a;

    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(s, s);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(s);
    for (int a = 0; a < s; ++a) {
        const int i = derived_k_[a];
        for (int j = 0; j < n_; ++j) {
            const double beta_ji = out.B(j, i);
            if (beta_ji == 0.0 || j == i)
                continue;
            if (pos[j] >= 0)
                M(a, pos[j]) -= beta_ji;
            else
                rhs[a] += beta_ji * out.k[j] * xt[j];
        }
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    const Eigen::VectorXd f = lu.solve(rhs);
    if (!f.allFinite())
        return false;
    for (int a = 0; a < s; ++a) {
        if (!(f[a] > 0.0))
            return false;
        out.k[derived_k_[a]] = f[a] / xt[derived_k_[a]];
    }

    // implicit differentiation of the balance solve
    for (int q = 0; q < p; ++q) {
        ParamDeriv& d = derivs[q];
        Eigen::VectorXd dr = Eigen::VectorXd::Zero(s);
        Eigen::MatrixXd dM = Eigen::MatrixXd::Zero(s, s);
        bool touched = false;
        for (const auto& [r, c, v] : d.dB) {
            // beta_{r,c} enters the equation of node c
            if (pos[c] < 0 || r == c)
                continue;
            if (pos[r] >= 0)
                dM(pos[c], pos[r]) -= v;
            else
                dr[pos[c]] += v * out.k[r] * xt[r];
            touched = true;
        }
        if (spec_.free[q].kind == ParamKind::Turnover) {
            const int j = spec_.free[q].node;
            for (int a = 0; a < s; ++a) {
                const double beta_ji = out.B(j, derived_k_[a]);
                if (beta_ji != 0.0 && j != derived_k_[a]) {
                    dr[a] += beta_ji * xt[j];
                    touched = true;
                }
            }
        }
        if (!touched)
            continue;
        const Eigen::VectorXd df = lu.solve(dr - dM * f);
        for (int a = 0; a < s; ++a)
            d.dk[derived_k_[a]] = df[a] / xt[derived_k_[a]];
    }
    return true;
}

Eigen::VectorXd ModelTemplate::theta_from(const ScaledModel& m) const {
    if (m.size() != n_)
        throw DomainError("model/template size mismatch");
    Eigen::VectorXd theta(dim());
    for (int q = 0; q < dim(); ++q) {
        const FreeParameter& fp = spec_.free[q];
        switch (fp.kind) {
        case ParamKind::Turnover:
            theta[q] = m.has_k() ? m.k[fp.node] : 1.0;
            break;
        case ParamKind::Alpha:
            theta[q] = m.alpha[fp.node];
            break;
        case ParamKind::Beta:
            theta[q] = m.B(fp.node, fp.from);
            break;
        }
    }
    return theta;
}

} // namespace kfp
