#include "kfp/compile.hpp"

#include "kfp/common.hpp"

#include <algorithm>
#include <cmath>

namespace kfp {

bool ScaledModel::is_labeled(int i) const {
    return std::find(labeled.begin(), labeled.end(), i) != labeled.end();
}

Eigen::MatrixXd ScaledModel::system_matrix() const {
    if (!has_k())
        throw DomainError("turnover rates are unknown; supply x_total");
    Eigen::MatrixXd bmi = B;
    bmi.diagonal().array() -= 1.0;
    return k.asDiagonal() * bmi;
}

Eigen::VectorXd ScaledModel::forcing_vector() const {
    if (!has_k())
        throw DomainError("turnover rates are unknown; supply x_total");
    return k.cwiseProduct(alpha);
}

Eigen::MatrixXd build_incidence(const PathwayGraph& g) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(g.size(), g.edges.size());
    for (int j = 0; j < static_cast<int>(g.edges.size()); ++j) {
        const Edge& e = g.edges[j];
        if (e.target >= 0)
            m(e.target, j) += 1.0;
        if (e.source >= 0)
            m(e.source, j) -= 1.0;
    }
    return m;
}

Eigen::VectorXd check_flux_balance(const PathwayGraph& g) {
    if (!g.all_fluxes_present())
        throw DomainError("flux balance check needs a flux on every edge");
    Eigen::VectorXd r = Eigen::VectorXd::Zero(g.size());
    for (const Edge& e : g.edges) {
        if (e.target >= 0)
            r[e.target] += *e.flux;
        if (e.source >= 0)
            r[e.source] -= *e.flux;
    }
    return r;
}

void require_valid(const PathwayGraph& g) {
    const ValidationReport rep = validate_graph(g);
    if (rep.valid())
        return;
    std::string msg = "invalid pathway graph:";
    for (const Violation& v : rep.violations)
        msg += "\n  [" + v.code + "] " + v.message;
    throw DomainError(msg);
}

namespace {

struct FluxTotals {
    Eigen::MatrixXd W;
    Eigen::VectorXd d_in, d_out, d_l, d_u, d_v, f_in, f_out;
};

FluxTotals accumulate_fluxes(const PathwayGraph& g) {
    const int n = g.size();
    FluxTotals t;
    t.W = Eigen::MatrixXd::Zero(n, n);
    t.d_l = Eigen::VectorXd::Zero(n);
    t.d_u = Eigen::VectorXd::Zero(n);
    t.d_v = Eigen::VectorXd::Zero(n);
    for (const Edge& e : g.edges) {
        if (!e.flux)
            throw DomainError("edge \"" + e.id + "\" has no flux value");
        const double f = *e.flux;
        switch (e.kind) {
        case EdgeKind::LabeledIn: t.d_l[e.target] += f; break;
        case EdgeKind::UnlabeledIn: t.d_u[e.target] += f; break;
        case EdgeKind::Exit: t.d_v[e.source] += f; break;
        case EdgeKind::Internal: t.W(e.source, e.target) += f; break;
        }
    }
    t.d_in = t.W.colwise().sum().transpose();
    t.d_out = t.W.rowwise().sum();
    t.f_in = t.d_in + t.d_l + t.d_u;
    t.f_out = t.d_out + t.d_v;
    return t;
}

} // namespace

CompiledModel compile_raw(const PathwayGraph& g, const Eigen::VectorXd& x_total) {
    const int n = g.size();
    if (x_total.size() != n)
        throw DomainError("x_total needs one concentration per metabolite");
    if ((x_total.array() <= 0.0).any())
        throw DomainError("total concentrations must be positive");

    FluxTotals t = accumulate_fluxes(g);
    CompiledModel m;
    m.names = g.nodes;
    m.W = std::move(t.W);
    m.d_in = std::move(t.d_in);
    m.d_out = std::move(t.d_out);
    m.d_l = std::move(t.d_l);
    m.d_u = std::move(t.d_u);
    m.d_v = std::move(t.d_v);
    m.f_in = std::move(t.f_in);
    m.f_out = std::move(t.f_out);
    m.b_hat = m.d_u;
    m.x_total = x_total;

    Eigen::MatrixXd lhs = m.W.transpose();
    lhs.diagonal() -= m.d_out + m.d_v;
    m.a_hat = lhs * x_total.cwiseInverse().asDiagonal();
    m.incidence = build_incidence(g);
    return m;
}

ScaledModel compile_scaled(const PathwayGraph& g,
                           const std::optional<Eigen::VectorXd>& x_total) {
    const int n = g.size();
    const FluxTotals t = accumulate_fluxes(g);

    for (int i = 0; i < n; ++i) {
        if (!(t.f_in[i] > 0.0))
            throw DomainError("node \"" + g.nodes[i] + "\" has zero throughput");
        const double resid = std::abs(t.f_in[i] - t.f_out[i]);
        if (resid > kFluxBalanceTol * t.f_in[i])
            throw DomainError("flux imbalance at node \"" + g.nodes[i] +
                              "\": F_in=" + fmt_g17(t.f_in[i]) +
                              " F_out=" + fmt_g17(t.f_out[i]));
    }

    ScaledModel m;
    m.names = g.nodes;
    m.alpha = t.d_u.cwiseQuotient(t.f_in);
    m.B = t.f_in.cwiseInverse().asDiagonal() * t.W.transpose();
    for (int tgt : g.labeled_targets())
        m.labeled.push_back(tgt);
    std::sort(m.labeled.begin(), m.labeled.end());

    if (x_total) {
        if (x_total->size() != n)
            throw DomainError("x_total needs one concentration per metabolite");
        if ((x_total->array() <= 0.0).any())
            throw DomainError("total concentrations must be positive");
        m.k = t.f_in.cwiseQuotient(*x_total);
    }
    return m;
}

} // namespace kfp
