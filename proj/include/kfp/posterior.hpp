#pragma once

#include "kfp/dataset.hpp"
#include "kfp/parameters.hpp"

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace kfp {

// Independent uniform priors, one per free parameter, plus one on the
// relative noise scale when that is inferred.
struct PriorSpec {
    std::vector<std::pair<double, double>> bounds; // aligned with ParameterSpec::free
    std::pair<double, double> noise{0.0, 0.5};

    static PriorSpec defaults_for(const ParameterSpec& spec);
};

struct SigmaMode {
    enum Kind { Infer, Fixed } kind = Infer;
    double fixed_value = 0.025;

    static SigmaMode infer() { return {Infer, 0.0}; }
    static SigmaMode fixed(double c) { return {Fixed, c}; }
};

// Log posterior of the free parameters given a measurement grid. Each cell is
// an independent Gaussian around the exact solution with
// sigma = max(c * prediction, 1e-3); c is either fixed or the trailing
// coordinate of theta. Outside the prior box the density is -infinity.
class Posterior {
  public:
    Posterior(Dataset data, ModelTemplate tmpl, PriorSpec prior, SigmaMode sigma);

    int dim() const { return n_model_ + (sigma_.kind == SigmaMode::Infer ? 1 : 0); }
    const std::vector<std::string>& names() const { return names_; }
    double lower(int q) const { return lo_[q]; }
    double upper(int q) const { return hi_[q]; }
    const ModelTemplate& model_template() const { return tmpl_; }

    double logp(const Eigen::VectorXd& theta) const;
    // returns logp and fills grad (same length as theta)
    double logp_grad(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const;

    static constexpr double kSigmaFloor = 1e-3;

  private:
    double eval(const Eigen::VectorXd& theta, Eigen::VectorXd* grad) const;

    Dataset data_;
    ModelTemplate tmpl_;
    PriorSpec prior_;
    SigmaMode sigma_;
    int n_model_ = 0;
    std::vector<std::string> names_;
    std::vector<double> lo_, hi_;
    std::vector<int> node_of_column_; // dataset column -> model node
    double log_prior_const_ = 0.0;
};

} // namespace kfp
