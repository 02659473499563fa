#pragma once

#include "kfp/pathway.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace kfp {

// Raw (unscaled) model quantities. Diagonal matrices are stored as their
// diagonals; W(i,j) is the flux carried by the internal edge i -> j.
struct CompiledModel {
    std::vector<std::string> names;
    Eigen::MatrixXd W;
    Eigen::VectorXd d_in;   // column sums of W
    Eigen::VectorXd d_out;  // row sums of W
    Eigen::VectorXd d_l;    // labeled entry flux per node
    Eigen::VectorXd d_u;    // unlabeled entry flux per node
    Eigen::VectorXd d_v;    // exit flux per node
    Eigen::VectorXd f_in;   // d_in + d_l + d_u
    Eigen::VectorXd f_out;  // d_out + d_v
    Eigen::MatrixXd a_hat;  // (W^T - D_out - D_V) (X^T)^{-1}
    Eigen::VectorXd b_hat;  // unlabeled entry vector
    Eigen::MatrixXd incidence;
    Eigen::VectorXd x_total;
};

// Scaled system  dxbar/dt = K (B - I) xbar + K alpha,  xbar(0) = 1.
struct ScaledModel {
    std::vector<std::string> names;
    Eigen::VectorXd k;     // turnover rates F_i / x_i^T; empty when unknown
    Eigen::MatrixXd B;     // B(i,j) = fraction of node i's influx arriving from j
    Eigen::VectorXd alpha; // fraction of node i's influx that is unlabeled-external
    std::vector<int> labeled; // nodes with a labeled external entry

    int size() const { return static_cast<int>(alpha.size()); }
    bool has_k() const { return k.size() == alpha.size(); }
    bool is_labeled(int i) const;

    // system matrices (requires k)
    Eigen::MatrixXd system_matrix() const;  // K (B - I)
    Eigen::VectorXd forcing_vector() const; // K alpha
};

// Signed incidence matrix: column per edge, +1 at the target row, -1 at the
// source row. Needs no flux values.
Eigen::MatrixXd build_incidence(const PathwayGraph& g);

// Per-node residual F_in - F_out. Requires all fluxes present.
Eigen::VectorXd check_flux_balance(const PathwayGraph& g);

// Relative flux-balance tolerance used by compile_scaled.
inline constexpr double kFluxBalanceTol = 1e-9;

// Build the raw model. Requires a valid graph, all fluxes, and positive
// total concentrations (one per node). Throws DomainError.
CompiledModel compile_raw(const PathwayGraph& g, const Eigen::VectorXd& x_total);

// Build the scaled model. Requires a valid graph with balanced fluxes
// (|F_in - F_out| <= kFluxBalanceTol * F_in per node) and positive node
// throughput. Turnover rates are filled in when x_total is given.
ScaledModel compile_scaled(const PathwayGraph& g,
                           const std::optional<Eigen::VectorXd>& x_total = {});

// Throws DomainError listing all violations if the graph is invalid.
void require_valid(const PathwayGraph& g);

} // namespace kfp
