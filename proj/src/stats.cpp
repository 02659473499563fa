#include "kfp/stats.hpp"

#include "kfp/common.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace kfp {

namespace {

double sample_sd(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v)
        ss += (x - mean) * (x - mean);
    return std::sqrt(ss / (n - 1.0));
}

} // namespace

double quantile(std::vector<double> samples, double q) {
    if (samples.empty())
        throw DomainError("quantile of an empty sample");
    std::sort(samples.begin(), samples.end());
    const double h = (samples.size() - 1) * q;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= samples.size())
        return samples.back();
    const double frac = h - static_cast<double>(lo);
    return samples[lo] + frac * (samples[lo + 1] - samples[lo]);
}

double silverman_bandwidth(const std::vector<double>& samples) {
    std::vector<double> s = samples;
    const double sd = sample_sd(s);
    const double iqr = quantile(s, 0.75) - quantile(s, 0.25);
    double spread = sd;
    if (iqr > 0.0)
        spread = std::min(sd, iqr / 1.34);
    return 0.9 * spread * std::pow(static_cast<double>(s.size()), -0.2);
}

Eigen::VectorXd kde_density(const std::vector<double>& samples,
                            const Eigen::VectorXd& grid) {
    const double h = silverman_bandwidth(samples);
    Eigen::VectorXd dens = Eigen::VectorXd::Zero(grid.size());
    if (h <= 0.0)
        return dens; // degenerate sample; caller handles
    const double inv_h = 1.0 / h;
    for (double x : samples)
        for (int g = 0; g < grid.size(); ++g) {
            const double z = (grid[g] - x) * inv_h;
            dens[g] += std::exp(-0.5 * z * z);
        }
    dens *= inv_h / (std::sqrt(2.0 * M_PI) * static_cast<double>(samples.size()));
    return dens;
}

double kde_mode(const std::vector<double>& samples) {
    if (samples.size() < 10)
        throw DomainError("kde_mode needs at least 10 samples");
    const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
    if (*mn == *mx)
        return *mn;
    const int n_grid = 512;
    Eigen::VectorXd grid(n_grid);
    for (int g = 0; g < n_grid; ++g)
        grid[g] = *mn + (*mx - *mn) * g / (n_grid - 1);
    const Eigen::VectorXd dens = kde_density(samples, grid);
    int best = 0;
    dens.maxCoeff(&best);
    return grid[best];
}

Interval credible_interval(std::vector<double> samples, double mass) {
    if (samples.size() < 40)
        throw DomainError("credible_interval needs at least 40 samples");
    if (!(mass > 0.0 && mass < 1.0))
        throw DomainError("interval mass must lie in (0, 1)");
    const double tail = (1.0 - mass) / 2.0;
    Interval iv;
    iv.lo = quantile(samples, tail);
    iv.hi = quantile(samples, 1.0 - tail);
    return iv;
}

namespace {

// split every chain in half; drops the last draw of odd-length chains
std::vector<std::vector<double>> split_chains(
    const std::vector<std::vector<double>>& chains) {
    std::vector<std::vector<double>> out;
    for (const auto& c : chains) {
        const std::size_t half = c.size() / 2;
        if (half == 0)
            throw DomainError("chains are too short to split");
        out.emplace_back(c.begin(), c.begin() + half);
        out.emplace_back(c.begin() + half, c.begin() + 2 * half);
    }
    return out;
}

struct Moments {
    double w = 0.0;        // mean within-chain variance
    double var_plus = 0.0; // pooled variance estimate
    double b_over_n = 0.0;
    std::size_t n = 0;
    std::vector<double> means;
    std::vector<double> vars;
};

Moments chain_moments(const std::vector<std::vector<double>>& sc) {
    Moments mo;
    mo.n = sc[0].size();
    for (const auto& c : sc) {
        const double mean = std::accumulate(c.begin(), c.end(), 0.0) / c.size();
        double ss = 0.0;
        for (double x : c)
            ss += (x - mean) * (x - mean);
        mo.means.push_back(mean);
        mo.vars.push_back(c.size() > 1 ? ss / (c.size() - 1.0) : 0.0);
    }
    mo.w = std::accumulate(mo.vars.begin(), mo.vars.end(), 0.0) / mo.vars.size();
    const double grand =
        std::accumulate(mo.means.begin(), mo.means.end(), 0.0) / mo.means.size();
    double bss = 0.0;
    for (double m : mo.means)
        bss += (m - grand) * (m - grand);
    mo.b_over_n = mo.means.size() > 1 ? bss / (mo.means.size() - 1.0) : 0.0;
    mo.var_plus = (mo.n - 1.0) / mo.n * mo.w + mo.b_over_n;
    return mo;
}

} // namespace

double split_rhat(const std::vector<std::vector<double>>& chains) {
    if (chains.size() < 2)
        throw DomainError("split_rhat needs at least two chains");
    const auto sc = split_chains(chains);
    const Moments mo = chain_moments(sc);
    if (mo.w == 0.0)
        return mo.b_over_n > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    // sampling noise can push the raw ratio a hair under 1; floor it there
    return std::max(1.0, std::sqrt(mo.var_plus / mo.w));
}

double normal_quantile(double p) {
    static const boost::math::normal_distribution<double> unit(0.0, 1.0);
    return boost::math::quantile(unit, p);
}

double ess_bulk(const std::vector<std::vector<double>>& chains) {
    if (chains.size() < 2)
        throw DomainError("ess_bulk needs at least two chains");
    auto sc = split_chains(chains);
    const std::size_t m = sc.size();
    const std::size_t n = sc[0].size();
    const std::size_t total = m * n;

    // rank-normalize the pooled draws (average ranks for ties)
    {
        std::vector<std::pair<double, std::size_t>> pool;
        pool.reserve(total);
        for (std::size_t c = 0; c < m; ++c)
            for (std::size_t i = 0; i < n; ++i)
                pool.emplace_back(sc[c][i], c * n + i);
        std::sort(pool.begin(), pool.end());
        std::vector<double> rank(total);
        std::size_t i = 0;
        while (i < total) {
            std::size_t j = i;
            while (j + 1 < total && pool[j + 1].first == pool[i].first)
                ++j;
            const double avg = (static_cast<double>(i) + j) / 2.0 + 1.0;
            for (std::size_t q = i; q <= j; ++q)
                rank[pool[q].second] = avg;
            i = j + 1;
        }
        for (std::size_t c = 0; c < m; ++c)
            for (std::size_t k = 0; k < n; ++k)
                sc[c][k] = normal_quantile((rank[c * n + k] - 0.375) /
                                           (static_cast<double>(total) + 0.25));
    }

    const Moments mo = chain_moments(sc);
    if (mo.var_plus == 0.0)
        return static_cast<double>(total);

    // combined autocorrelation, Geyer initial monotone positive sequence
    std::vector<std::vector<double>> acov(m);
    for (std::size_t c = 0; c < m; ++c) {
        acov[c].resize(n);
        const double mean = mo.means[c];
        for (std::size_t lag = 0; lag < n; ++lag) {
            double s = 0.0;
            for (std::size_t i = 0; i + lag < n; ++i)
                s += (sc[c][i] - mean) * (sc[c][i + lag] - mean);
            acov[c][lag] = s / n;
        }
    }
    auto rho = [&](std::size_t lag) {
        double mean_acov = 0.0;
        for (std::size_t c = 0; c < m; ++c)
            mean_acov += acov[c][lag];
        mean_acov /= m;
        // acov is the biased (divide-by-n) estimate, so rescale w accordingly
        const double w_b = mo.w * (n - 1.0) / n;
        return 1.0 - (w_b - mean_acov) / mo.var_plus;
    };

    double tau = 0.0;
    double prev_pair = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
        double pair = rho(2 * k) + rho(2 * k + 1);
        if (pair <= 0.0)
            break;
        pair = std::min(pair, prev_pair); // enforce monotone decrease
        prev_pair = pair;
        tau += pair;
    }
    tau = std::max(2.0 * tau - 1.0, 1.0 / std::log10(static_cast<double>(total) + 10.0));
    return static_cast<double>(total) / tau;
}

Diagnostics compute_diagnostics(const std::vector<Eigen::MatrixXd>& draws) {
    if (draws.size() < 2)
        throw DomainError("diagnostics need at least two chains");
    const int params = static_cast<int>(draws[0].cols());
    Diagnostics d;
    for (int p = 0; p < params; ++p) {
        std::vector<std::vector<double>> chains;
        for (const auto& m : draws) {
            std::vector<double> c(m.rows());
            for (int i = 0; i < m.rows(); ++i)
                c[i] = m(i, p);
            chains.push_back(std::move(c));
        }
        d.rhat.push_back(split_rhat(chains));
        d.ess.push_back(ess_bulk(chains));
    }
    return d;
}

double ks_uniform(std::vector<double> samples, double lo, double hi) {
    if (samples.empty())
        throw DomainError("ks_uniform needs samples");
    if (!(hi > lo))
        throw DomainError("ks_uniform needs hi > lo");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = std::clamp((samples[i] - lo) / (hi - lo), 0.0, 1.0);
        d = std::max(d, std::abs((i + 1.0) / n - f));
        d = std::max(d, std::abs(f - i / n));
    }
    return d;
}

} // namespace kfp
