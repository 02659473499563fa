#include "kfp/simulate.hpp"

#include "kfp/analysis.hpp"
#include "kfp/common.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>

namespace kfp {

namespace {

void check_times(const Eigen::VectorXd& times) {
    for (int i = 0; i < times.size(); ++i) {
        if (!(times[i] >= 0.0))
            throw DomainError("times must be nonnegative");
        if (i > 0 && !(times[i] >= times[i - 1]))
            throw DomainError("times must be ascending");
    }
}

void require_k(const ScaledModel& m) {
    if (!m.has_k())
        throw DomainError("simulation needs turnover rates (provide x_total or k)");
}

} // namespace

Eigen::MatrixXd propagate_affine(const Eigen::MatrixXd& A, const Eigen::VectorXd& c,
                                 const Eigen::VectorXd& y0,
                                 const Eigen::VectorXd& times) {
    const int n = static_cast<int>(y0.size());
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + 1, n + 1);
    aug.topLeftCorner(n, n) = A;
    aug.topRightCorner(n, 1) = c;
    Eigen::VectorXd z0(n + 1);
    z0 << y0, 1.0;

    Eigen::MatrixXd out(times.size(), n);
    for (int t = 0; t < times.size(); ++t) {
        const Eigen::MatrixXd e = (aug * times[t]).exp();
        out.row(t) = (e * z0).head(n).transpose();
    }
    return out;
}

Trajectory solve_exact(const ScaledModel& m, const Eigen::VectorXd& times) {
    require_k(m);
    check_times(times);
    Trajectory traj;
    traj.times = times;
    traj.values = propagate_affine(m.system_matrix(), m.forcing_vector(),
                                   Eigen::VectorXd::Ones(m.size()), times);
    return traj;
}

namespace {

// Dormand-Prince 4(5) tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// difference between 5th and embedded 4th order weights
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// dense-output weights (fifth-order continuous extension)
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

} // namespace

Trajectory solve_numeric(const ScaledModel& m, const Eigen::VectorXd& times,
                         const OdeOptions& opts) {
    require_k(m);
    check_times(times);
    const int n = m.size();
    const Eigen::MatrixXd A = m.system_matrix();
    const Eigen::VectorXd c = m.forcing_vector();
    auto rhs = [&](const Eigen::VectorXd& y) -> Eigen::VectorXd { return A * y + c; };

    Trajectory traj;
    traj.times = times;
    traj.values.resize(times.size(), n);

    Eigen::VectorXd y = Eigen::VectorXd::Ones(n);
    double t = 0.0;
    int next_out = 0;
    while (next_out < times.size() && times[next_out] <= 0.0)
        traj.values.row(next_out++) = y.transpose();
    if (next_out >= times.size())
        return traj;

    Eigen::VectorXd k1 = rhs(y);
    // initial step from the local derivative scale
    double h = 1e-2;
    {
        const double d0 = y.norm(), d1 = k1.norm();
        if (d1 > 1e-10)
            h = std::min(0.1 * d0 / d1 + 1e-12, times[times.size() - 1] / 10.0);
        h = std::max(h, 1e-8);
    }

    long steps = 0;
    const double t_end = times[times.size() - 1];
    Eigen::VectorXd k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ynew(n), yerr(n);
    while (next_out < times.size()) {
        if (++steps > opts.max_steps)
            throw DomainError("step budget exhausted in solve_numeric");
        const double h_min = 16.0 * std::numeric_limits<double>::epsilon() *
                             std::max(1.0, std::abs(t));
        if (h < h_min)
            throw DomainError("step size underflow in solve_numeric (stiff system)");
        if (t + h > t_end)
            h = t_end - t;

        k2 = rhs(y + h * (a21 * k1));
        k3 = rhs(y + h * (a31 * k1 + a32 * k2));
        k4 = rhs(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        k5 = rhs(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        k6 = rhs(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        k7 = rhs(ynew);
        yerr = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double err = 0.0;
        for (int i = 0; i < n; ++i) {
            const double sc = opts.abs_tol +
                              opts.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            const double r = yerr[i] / sc;
            err += r * r;
        }
        err = std::sqrt(err / n);

        if (err <= 1.0) {
            const double t_new = t + h;
            if (next_out < times.size() && times[next_out] <= t_new + 1e-14 * t_new) {
                // dense output inside the accepted step
                const Eigen::VectorXd ydiff = ynew - y;
                const Eigen::VectorXd bspl = h * k1 - ydiff;
                const Eigen::VectorXd r4 = ydiff - h * k7 - bspl;
                const Eigen::VectorXd r5 =
                    h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
                while (next_out < times.size() &&
                       times[next_out] <= t_new + 1e-14 * t_new) {
                    const double s = h > 0.0 ? (times[next_out] - t) / h : 0.0;
                    const double s1 = 1.0 - s;
                    traj.values.row(next_out++) =
                        (y + s * (ydiff + s1 * (bspl + s * (r4 + s1 * r5)))).transpose();
                }
            }
            t = t_new;
            y = ynew;
            k1 = k7; // first-same-as-last
        }
        const double safety = 0.9;
        double factor = err > 0.0 ? safety * std::pow(err, -0.2) : 5.0;
        factor = std::clamp(factor, 0.2, 5.0);
        h *= factor;
    }
    return traj;
}

PhasePlane phase_plane_sample(const ScaledModel& m, int grid_points, int traj_points) {
    require_k(m);
    if (m.size() != 2)
        throw DomainError("phase plane sampling is defined for two-pool models");
    if (grid_points < 2 || traj_points < 2)
        throw DomainError("phase plane needs at least a 2x2 grid and 2 trajectory points");

    const Eigen::MatrixXd A = m.system_matrix();
    const Eigen::VectorXd c = m.forcing_vector();

    PhasePlane pp;
    pp.grid.resize(grid_points);
    for (int i = 0; i < grid_points; ++i)
        pp.grid[i] = static_cast<double>(i) / (grid_points - 1);
    pp.u.resize(grid_points, grid_points);
    pp.v.resize(grid_points, grid_points);
    for (int i = 0; i < grid_points; ++i)
        for (int j = 0; j < grid_points; ++j) {
            const Eigen::Vector2d x(pp.grid[i], pp.grid[j]);
            const Eigen::Vector2d f = A * x + c;
            pp.u(i, j) = f[0];
            pp.v(i, j) = f[1];
        }

    // nullcline of node i: row i of K(B-I) x + K alpha = 0, scaled by 1/k_i
    pp.nullcline_coeffs.resize(2, 2);
    pp.nullcline_consts.resize(2);
    for (int i = 0; i < 2; ++i) {
        pp.nullcline_coeffs.row(i) = m.B.row(i);
        pp.nullcline_coeffs(i, i) -= 1.0;
        pp.nullcline_consts[i] = m.alpha[i];
    }

    pp.equilibrium = steady_state(m);

    const double horizon = 3.0 / slowest_rate(m);
    Eigen::VectorXd ts(traj_points);
    for (int i = 0; i < traj_points; ++i)
        ts[i] = horizon * i / (traj_points - 1);
    pp.trajectory = solve_exact(m, ts);
    return pp;
}

double slowest_rate(const ScaledModel& m) {
    require_k(m);
    const Eigen::VectorXcd ev = m.system_matrix().eigenvalues();
    double slowest = std::numeric_limits<double>::infinity();
    for (int i = 0; i < ev.size(); ++i)
        slowest = std::min(slowest, -ev[i].real());
    if (!(slowest > 0.0))
        throw DomainError("system has a non-decaying mode");
    return slowest;
}

} // namespace kfp
