#pragma once

#include <Eigen/Dense>

#include <vector>

namespace kfp {

// Joint propagation of x' = A x + c and the parameter sensitivities
// s_q' = A s_q + dA_q x + dc_q as one block lower-triangular affine system,
// advanced between consecutive output times with cached matrix exponentials.
// For an evenly spaced time grid a single exponential is reused throughout,
// which is what makes gradient-based sampling affordable.
class SensitivitySolver {
  public:
    SensitivitySolver(const Eigen::MatrixXd& A, const Eigen::VectorXd& c,
                      const std::vector<Eigen::MatrixXd>& dA,
                      const std::vector<Eigen::VectorXd>& dc);

    // times: ascending, nonnegative. values: T x n. sens[q]: T x n.
    void run(const Eigen::VectorXd& times, Eigen::MatrixXd& values,
             std::vector<Eigen::MatrixXd>& sens) const;

  private:
    int n_ = 0;
    int p_ = 0;
    Eigen::MatrixXd big_; // (n (p+1) + 1)^2
};

} // namespace kfp
