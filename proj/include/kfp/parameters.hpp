#pragma once

#include "kfp/compile.hpp"
#include "kfp/pathway.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace kfp {

enum class ParamKind { Turnover, Alpha, Beta };

struct FreeParameter {
    ParamKind kind = ParamKind::Turnover;
    int node = -1; // receiving node (row of B for beta)
    int from = -1; // source node (column of B); beta only
    std::string name;
    double lo = 0.0;
    double hi = 1.0; // +inf for turnover rates
};

struct DerivedParameter {
    std::string name;
    std::string expression;
};

struct ConcentrationConstraint {
    std::string node;
    std::string expression;
};

struct ParameterSpec {
    std::vector<FreeParameter> free;
    std::vector<DerivedParameter> derived;
    std::vector<ConcentrationConstraint> concentration_dependent;

    int dim() const { return static_cast<int>(free.size()); }
    int index_of(const std::string& name) const; // -1 if absent
    std::vector<std::string> names() const;
};

// Enumerate the free parameters of the scaled model for a valid graph.
//
// Row sums of the scaled system obey sum_j beta_{i,j} + alpha_i = 1 at every
// node without a labeled entry, so one beta per such row (the lowest source
// index) is eliminated. Exit-less nodes have no independent turnover rate
// when total concentrations are available: their throughput follows from the
// downstream balance F_i = sum_j beta_{j,i} F_j. Without concentrations that
// relation ties k_i to unknown pool sizes and k_i stays free; the relation is
// reported as a concentration-dependent constraint instead.
ParameterSpec free_parameters(const PathwayGraph& g, bool concentrations_available);

// Derivative of a ScaledModel with respect to one free parameter.
struct ParamDeriv {
    Eigen::VectorXd dk;
    Eigen::VectorXd dalpha;
    std::vector<std::tuple<int, int, double>> dB; // sparse (row, col, value)
};

// Maps a free-parameter vector to a concrete ScaledModel (and back).
class ModelTemplate {
  public:
    ModelTemplate(const PathwayGraph& g,
                  std::optional<Eigen::VectorXd> x_total = {});

    const ParameterSpec& spec() const { return spec_; }
    int dim() const { return spec_.dim(); }
    int nodes() const { return n_; }
    const std::vector<std::string>& names() const { return names_; }
    bool concentrations_available() const { return x_total_.has_value(); }

    // False when theta is structurally unusable (derived throughputs come out
    // nonpositive or the balance system is singular).
    bool evaluate(const Eigen::VectorXd& theta, ScaledModel& out) const;
    bool evaluate_with_jacobian(const Eigen::VectorXd& theta, ScaledModel& out,
                                std::vector<ParamDeriv>& derivs) const;

    // Free-parameter vector of an existing model on the same graph. Missing
    // turnover rates are written as 1.
    Eigen::VectorXd theta_from(const ScaledModel& m) const;

  private:
    int n_ = 0;
    std::vector<std::string> names_;
    std::vector<int> labeled_;
    std::vector<bool> is_labeled_;
    std::vector<bool> has_unlabeled_;
    std::vector<std::vector<int>> beta_support_; // per row, ascending columns
    std::vector<int> elim_col_;                  // -1 when row has none
    std::vector<int> derived_k_;                 // exit-less nodes, ascending
    std::optional<Eigen::VectorXd> x_total_;
    ParameterSpec spec_;
};

} // namespace kfp
