#pragma once

#include "kfp/compile.hpp"

#include <Eigen/Dense>

#include <vector>

namespace kfp {

struct Trajectory {
    Eigen::VectorXd times;
    Eigen::MatrixXd values; // one row per time, one column per node
};

// Exact solution of dx/dt = K(B-I) x + K alpha from x(0) = 1, evaluated via
// the matrix exponential of the affine-augmented system. Times must be
// nonnegative and ascending.
Trajectory solve_exact(const ScaledModel& m, const Eigen::VectorXd& times);

// General affine propagator y' = A y + c used by solve_exact and the
// sensitivity system: returns y at the requested times starting from y0 at
// t = 0, each time evaluated directly.
Eigen::MatrixXd propagate_affine(const Eigen::MatrixXd& A, const Eigen::VectorXd& c,
                                 const Eigen::VectorXd& y0,
                                 const Eigen::VectorXd& times);

// Independently written Dormand-Prince 4(5) integrator with adaptive step
// control. Throws DomainError when the step size underflows (stiffness) or
// the step budget is exhausted.
struct OdeOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    long max_steps = 20'000'000;
};

Trajectory solve_numeric(const ScaledModel& m, const Eigen::VectorXd& times,
                         const OdeOptions& opts = {});

// Phase portrait of a two-pool model: vector field on a grid over [0,1]^2,
// both nullclines, the equilibrium, and the trajectory from (1,1).
struct PhasePlane {
    Eigen::VectorXd grid;            // axis ticks, both axes
    Eigen::MatrixXd u, v;            // field components, u(i,j) at (grid[i], grid[j])
    Eigen::MatrixXd nullcline_coeffs; // row per node: a1 x1 + a2 x2 + c = 0
    Eigen::VectorXd nullcline_consts;
    Eigen::VectorXd equilibrium;
    Trajectory trajectory;
};

PhasePlane phase_plane_sample(const ScaledModel& m, int grid_points = 21,
                              int traj_points = 400);

// Magnitude of the slowest decay mode of K(B-I); 3/slowest_rate reaches
// 95% settling.
double slowest_rate(const ScaledModel& m);

} // namespace kfp
