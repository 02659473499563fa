#include "kfp/posterior.hpp"

#include "kfp/common.hpp"
#include "kfp/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kfp {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kHalfLog2Pi = 0.91893853320467274178;
} // namespace

PriorSpec PriorSpec::defaults_for(const ParameterSpec& spec) {
    PriorSpec p;
    for (const FreeParameter& fp : spec.free)
        p.bounds.emplace_back(0.0, fp.kind == ParamKind::Turnover ? 3.0 : 1.0);
    return p;
}

Posterior::Posterior(Dataset data, ModelTemplate tmpl, PriorSpec prior, SigmaMode sigma)
    : data_(std::move(data)), tmpl_(std::move(tmpl)), prior_(std::move(prior)),
      sigma_(sigma) {
    n_model_ = tmpl_.dim();
    if (static_cast<int>(prior_.bounds.size()) != n_model_)
        throw DomainError("prior needs one bound pair per free parameter");

    names_ = tmpl_.spec().names();
    for (int q = 0; q < n_model_; ++q) {
        const auto [lo, hi] = prior_.bounds[q];
        const FreeParameter& fp = tmpl_.spec().free[q];
        if (!(hi > lo) || lo < fp.lo || hi > fp.hi)
            throw DomainError("prior for " + fp.name + " leaves the parameter domain");
        lo_.push_back(lo);
        hi_.push_back(hi);
    }
    if (sigma_.kind == SigmaMode::Infer) {
        const auto [lo, hi] = prior_.noise;
        if (!(hi > lo) || lo < 0.0)
            throw DomainError("noise prior must be a nonnegative interval");
        names_.push_back("sigma_rel");
        lo_.push_back(lo);
        hi_.push_back(hi);
    } else if (!(sigma_.fixed_value > 0.0)) {
        throw DomainError("fixed noise scale must be positive");
    }

    for (int q = 0; q < static_cast<int>(lo_.size()); ++q)
        log_prior_const_ -= std::log(hi_[q] - lo_[q]);

    for (const std::string& node : data_.nodes) {
        int idx = -1;
        for (int i = 0; i < tmpl_.nodes(); ++i)
            if (tmpl_.names()[i] == node) {
                idx = i;
                break;
            }
        if (idx < 0)
            throw DomainError("dataset node \"" + node + "\" is not in the model");
        node_of_column_.push_back(idx);
    }
}

double Posterior::logp(const Eigen::VectorXd& theta) const {
    return eval(theta, nullptr);
}

double Posterior::logp_grad(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const {
    grad.resize(theta.size());
    return eval(theta, &grad);
}

double Posterior::eval(const Eigen::VectorXd& theta, Eigen::VectorXd* grad) const {
    if (theta.size() != dim())
        throw DomainError("posterior parameter vector has wrong length");
    for (int q = 0; q < dim(); ++q)
        if (!(theta[q] > lo_[q]) || !(theta[q] < hi_[q]))
            return kNegInf;

    const double c_noise =
        sigma_.kind == SigmaMode::Infer ? theta[dim() - 1] : sigma_.fixed_value;

    ScaledModel m;
    std::vector<ParamDeriv> derivs;
    bool ok;
    if (grad)
        ok = tmpl_.evaluate_with_jacobian(theta.head(n_model_), m, derivs);
    else
        ok = tmpl_.evaluate(theta.head(n_model_), m);
    if (!ok)
        return kNegInf;

    if (grad)
        grad->setZero();
    double lp = log_prior_const_;
    if (data_.n_times() == 0)
        return lp;

    const Eigen::MatrixXd bmi_scaled = m.system_matrix();
    const Eigen::VectorXd forcing = m.forcing_vector();

    std::vector<Eigen::MatrixXd> dA;
    std::vector<Eigen::VectorXd> dc;
    if (grad) {
        Eigen::MatrixXd bmi = m.B;
        bmi.diagonal().array() -= 1.0;
        dA.assign(n_model_, Eigen::MatrixXd::Zero(m.size(), m.size()));
        dc.assign(n_model_, Eigen::VectorXd::Zero(m.size()));
        for (int q = 0; q < n_model_; ++q) {
            const ParamDeriv& d = derivs[q];
            for (int i = 0; i < m.size(); ++i)
                if (d.dk[i] != 0.0) {
                    dA[q].row(i) += d.dk[i] * bmi.row(i);
                    dc[q][i] += d.dk[i] * m.alpha[i];
                }
            for (const auto& [r, col, v] : d.dB)
                dA[q](r, col) += m.k[r] * v;
            dc[q] += m.k.cwiseProduct(d.dalpha);
        }
    }

    SensitivitySolver solver(bmi_scaled, forcing, dA, dc);
    Eigen::MatrixXd pred;
    std::vector<Eigen::MatrixXd> sens;
    solver.run(data_.times, pred, sens);
    if (!pred.allFinite())
        return kNegInf;

    for (int t = 0; t < data_.n_times(); ++t)
        for (int col = 0; col < data_.n_nodes(); ++col) {
            const int node = node_of_column_[col];
            const double mu = pred(t, node);
            const bool scaled_sigma = c_noise * mu > kSigmaFloor;
            const double s = scaled_sigma ? c_noise * mu : kSigmaFloor;
            for (int r = 0; r < data_.replicates; ++r) {
                const double z = (data_.at(t, col, r) - mu) / s;
                lp += -0.5 * z * z - std::log(s) - kHalfLog2Pi;
                if (!grad)
                    continue;
                // dL/dmu has a direct term and one through sigma
                const double dl_dsigma = (z * z - 1.0) / s;
                double dl_dmu = z / s;
                if (scaled_sigma) {
                    dl_dmu += dl_dsigma * c_noise;
                    if (sigma_.kind == SigmaMode::Infer)
                        (*grad)[dim() - 1] += dl_dsigma * mu;
                }
                for (int q = 0; q < n_model_; ++q)
                    (*grad)[q] += dl_dmu * sens[q](t, node);
            }
        }
    return lp;
}

} // namespace kfp
