#include "kfp/sensitivity.hpp"

#include "kfp/common.hpp"

#include <unsupported/Eigen/MatrixFunctions>

namespace kfp {

SensitivitySolver::SensitivitySolver(const Eigen::MatrixXd& A,
                                     const Eigen::VectorXd& c,
                                     const std::vector<Eigen::MatrixXd>& dA,
                                     const std::vector<Eigen::VectorXd>& dc)
    : n_(static_cast<int>(A.rows())), p_(static_cast<int>(dA.size())) {
    if (dc.size() != dA.size())
        throw DomainError("sensitivity system needs matching dA/dc lists");
    const int d = n_ * (p_ + 1) + 1;
    big_ = Eigen::MatrixXd::Zero(d, d);
    big_.topLeftCorner(n_, n_) = A;
    big_.topRightCorner(n_, 1) = c;
    for (int q = 0; q < p_; ++q) {
        const int r = n_ * (q + 1);
        big_.block(r, 0, n_, n_) = dA[q];
        big_.block(r, r, n_, n_) = A;
        big_.block(r, d - 1, n_, 1) = dc[q];
    }
}

void SensitivitySolver::run(const Eigen::VectorXd& times, Eigen::MatrixXd& values,
                            std::vector<Eigen::MatrixXd>& sens) const {
    const int d = static_cast<int>(big_.rows());
    const int t_count = static_cast<int>(times.size());
    values.resize(t_count, n_);
    sens.assign(p_, Eigen::MatrixXd(t_count, n_));

    Eigen::VectorXd y = Eigen::VectorXd::Zero(d);
    y.head(n_).setOnes();
    y[d - 1] = 1.0;

    // the measurement grids in play are (nearly always) evenly spaced, so the
    // per-interval exponentials collapse to one or two distinct matrices
    std::vector<std::pair<double, Eigen::MatrixXd>> cache;
    double t_prev = 0.0;
    for (int t = 0; t < t_count; ++t) {
        const double dt = times[t] - t_prev;
        if (!(dt >= 0.0))
            throw DomainError("sensitivity times must be ascending and nonnegative");
        if (dt > 0.0) {
            const Eigen::MatrixXd* e = nullptr;
            for (const auto& [key, mat] : cache)
                if (key == dt) {
                    e = &mat;
                    break;
                }
            if (!e) {
                cache.emplace_back(dt, (big_ * dt).exp());
                e = &cache.back().second;
            }
            y = *e * y;
        }
        t_prev = times[t];
        values.row(t) = y.head(n_).transpose();
        for (int q = 0; q < p_; ++q)
            sens[q].row(t) = y.segment(n_ * (q + 1), n_).transpose();
    }
}

} // namespace kfp
