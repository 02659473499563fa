#include "kfp/fit.hpp"

#include "kfp/common.hpp"

#include <algorithm>

namespace kfp {

std::vector<double> PosteriorResult::pooled(int param) const {
    std::vector<double> out;
    for (const auto& c : chains)
        for (int i = 0; i < c.rows(); ++i)
            out.push_back(c(i, param));
    return out;
}

const ParamSummary& PosteriorResult::summary(const std::string& name) const {
    for (const ParamSummary& s : summaries)
        if (s.name == name)
            return s;
    throw DomainError("no parameter named \"" + name + "\" in the fit");
}

PosteriorResult summarize_chains(std::vector<std::string> names,
                                 std::vector<ChainOutput> chain_outputs) {
    PosteriorResult res;
    res.names = std::move(names);
    std::vector<Eigen::MatrixXd> draw_mats;
    for (ChainOutput& c : chain_outputs) {
        res.divergences += c.stats.divergences;
        res.mean_accept += c.stats.mean_accept;
        res.step_sizes.push_back(c.stats.step_size);
        draw_mats.push_back(std::move(c.draws));
    }
    res.mean_accept /= static_cast<double>(chain_outputs.size());
    res.chains = std::move(draw_mats);

    const Diagnostics diag = compute_diagnostics(res.chains);
    res.converged = true;
    for (std::size_t p = 0; p < res.names.size(); ++p) {
        ParamSummary s;
        s.name = res.names[p];
        const std::vector<double> pool = res.pooled(static_cast<int>(p));
        s.mode = kde_mode(pool);
        s.ci = credible_interval(pool);
        s.rhat = diag.rhat[p];
        s.ess = diag.ess[p];
        if (!(s.rhat < kRhatThreshold))
            res.converged = false;
        res.summaries.push_back(std::move(s));
    }
    return res;
}

PosteriorResult fit(const PathwayGraph& g, const Dataset& data,
                    const std::optional<Eigen::VectorXd>& x_total,
                    const PriorSpec* prior, const FitConfig& cfg) {
    ModelTemplate tmpl(g, x_total);
    const PriorSpec p = prior ? *prior : PriorSpec::defaults_for(tmpl.spec());
    Posterior post(data, std::move(tmpl), p, cfg.sigma);
    std::vector<std::string> names = post.names();
    std::vector<ChainOutput> chains = run_chains(post, cfg.sampler);
    return summarize_chains(std::move(names), std::move(chains));
}

} // namespace kfp
