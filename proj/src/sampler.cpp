#include "kfp/sampler.hpp"

#include "kfp/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kfp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double logistic(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

double log_add_exp(double a, double b) {
    if (a == kNegInf)
        return b;
    if (b == kNegInf)
        return a;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// Posterior seen through the coordinate-wise logit map onto R^d, with the
// log-Jacobian folded in so the densities agree.
class UnconstrainedTarget {
  public:
    explicit UnconstrainedTarget(const Posterior& post) : post_(post), d_(post.dim()) {
        lo_.resize(d_);
        w_.resize(d_);
        for (int q = 0; q < d_; ++q) {
            lo_[q] = post.lower(q);
            w_[q] = post.upper(q) - post.lower(q);
        }
    }

    int dim() const { return d_; }

    Eigen::VectorXd constrain(const Eigen::VectorXd& z) const {
        Eigen::VectorXd theta(d_);
        for (int q = 0; q < d_; ++q)
            theta[q] = lo_[q] + w_[q] * logistic(z[q]);
        return theta;
    }

    double logp(const Eigen::VectorXd& z) const {
        const double lp = post_.logp(constrain(z));
        return lp == kNegInf ? kNegInf : lp + log_jacobian(z);
    }

    double logp_grad(const Eigen::VectorXd& z, Eigen::VectorXd& grad) const {
        const Eigen::VectorXd theta = constrain(z);
        Eigen::VectorXd gtheta;
        const double lp = post_.logp_grad(theta, gtheta);
        if (lp == kNegInf) {
            grad.setZero(d_);
            return kNegInf;
        }
        grad.resize(d_);
        for (int q = 0; q < d_; ++q) {
            const double s = logistic(z[q]);
            grad[q] = gtheta[q] * w_[q] * s * (1.0 - s) + (1.0 - 2.0 * s);
        }
        return lp + log_jacobian(z);
    }

  private:
    double log_jacobian(const Eigen::VectorXd& z) const {
        double lj = 0.0;
        for (int q = 0; q < d_; ++q)
            lj += std::log(w_[q]) - softplus(z[q]) - softplus(-z[q]);
        return lj;
    }

    const Posterior& post_;
    int d_;
    Eigen::VectorXd lo_, w_;
};

struct Welford {
    long n = 0;
    Eigen::VectorXd mean, m2;

    void init(int d) {
        n = 0;
        mean = Eigen::VectorXd::Zero(d);
        m2 = Eigen::VectorXd::Zero(d);
    }
    void add(const Eigen::VectorXd& x) {
        ++n;
        const Eigen::VectorXd delta = x - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta.cwiseProduct(x - mean);
    }
    Eigen::VectorXd variance() const {
        if (n < 2)
            return Eigen::VectorXd::Ones(mean.size());
        return m2 / static_cast<double>(n - 1);
    }
};

// Stan-style warmup layout: step-size-only buffer, doubling variance windows,
// step-size-only tail.
struct AdaptSchedule {
    int init_end = 0;
    int term_start = 0;
    std::vector<int> window_ends;

    AdaptSchedule(int warmup) {
        int init = 75, term = 50, base = 25;
        if (warmup < init + term + base) {
            init = static_cast<int>(0.15 * warmup);
            term = static_cast<int>(0.10 * warmup);
            base = warmup - init - term;
        }
        init_end = init;
        term_start = warmup - term;
        if (base <= 0)
            return;
        int start = init_end, size = base;
        while (start < term_start) {
            int end = start + size;
            // absorb a final stub window that could not double again
            if (end > term_start || term_start - end < 2 * size)
                end = term_start;
            window_ends.push_back(end);
            start = end;
            size *= 2;
        }
    }
};

struct DualAveraging {
    double mu = 0.0, log_eps = 0.0, log_eps_bar = 0.0, h_bar = 0.0;
    double gamma = 0.05, t0 = 10.0, kappa = 0.75;
    long t = 0;

    void restart(double eps) {
        mu = std::log(10.0 * eps);
        log_eps = std::log(eps);
        log_eps_bar = 0.0;
        h_bar = 0.0;
        t = 0;
    }
    void update(double accept_prob, double target) {
        ++t;
        const double td = static_cast<double>(t);
        h_bar = (1.0 - 1.0 / (td + t0)) * h_bar + (target - accept_prob) / (td + t0);
        log_eps = mu - std::sqrt(td) / gamma * h_bar;
        const double eta = std::pow(td, -kappa);
        log_eps_bar = eta * log_eps + (1.0 - eta) * log_eps_bar;
    }
    double eps() const { return std::exp(log_eps); }
    double eps_bar() const { return std::exp(log_eps_bar); }
};

struct PhasePoint {
    Eigen::VectorXd z, p, grad;
    double logp = 0.0;
};

class NutsChain {
  public:
    NutsChain(const UnconstrainedTarget& target, const SamplerConfig& cfg, Rng& rng)
        : t_(target), cfg_(cfg), rng_(rng), d_(target.dim()) {
        inv_mass_ = Eigen::VectorXd::Ones(d_);
    }

    ChainOutput run() {
        ChainOutput out;
        out.draws.resize(cfg_.draws, d_);

        PhasePoint cur;
        cur.z.resize(d_);
        cur.p = Eigen::VectorXd::Zero(d_);
        // a few tries in case the random corner of the cube is unusable
        for (int attempt = 0;; ++attempt) {
            for (int q = 0; q < d_; ++q)
                cur.z[q] = rng_.uniform(-2.0, 2.0);
            cur.logp = t_.logp_grad(cur.z, cur.grad);
            if (cur.logp != kNegInf)
                break;
            if (attempt > 100)
                throw DomainError("cannot find a usable starting point");
        }

        eps_ = find_reasonable_eps(cur);
        da_.restart(eps_);
        AdaptSchedule sched(cfg_.warmup);
        Welford wf;
        wf.init(d_);
        std::size_t window = 0;

        double accept_sum = 0.0;
        long accept_n = 0;
        for (int it = 0; it < cfg_.warmup + cfg_.draws; ++it) {
            const bool warm = it < cfg_.warmup;
            const double accept = transition(cur, warm ? nullptr : &out.stats);
            if (warm) {
                da_.update(accept, cfg_.target_accept);
                eps_ = da_.eps();
                const bool in_window = it >= sched.init_end && it < sched.term_start;
                if (in_window)
                    wf.add(cur.z);
                if (window < sched.window_ends.size() &&
                    it + 1 == sched.window_ends[window]) {
                    Eigen::VectorXd var = wf.variance();
                    const double n = static_cast<double>(wf.n);
                    inv_mass_ = var * (n / (n + 5.0)) +
                                Eigen::VectorXd::Constant(d_, 1e-3 * (5.0 / (n + 5.0)));
                    wf.init(d_);
                    ++window;
                    eps_ = find_reasonable_eps(cur);
                    da_.restart(eps_);
                }
                if (it + 1 == cfg_.warmup)
                    eps_ = da_.eps_bar();
            } else {
                accept_sum += accept;
                ++accept_n;
                out.draws.row(it - cfg_.warmup) = t_.constrain(cur.z).transpose();
            }
        }
        out.stats.mean_accept = accept_n ? accept_sum / accept_n : 0.0;
        out.stats.step_size = eps_;
        return out;
    }

  private:
    double hamiltonian(const PhasePoint& pt) const {
        return -pt.logp + 0.5 * pt.p.dot(inv_mass_.cwiseProduct(pt.p));
    }

    void leapfrog(PhasePoint& pt, double eps) const {
        pt.p += 0.5 * eps * pt.grad;
        pt.z += eps * inv_mass_.cwiseProduct(pt.p);
        pt.logp = t_.logp_grad(pt.z, pt.grad);
        pt.p += 0.5 * eps * pt.grad;
    }

    double find_reasonable_eps(const PhasePoint& origin) {
        double eps = 1.0;
        PhasePoint pt = origin;
        pt.p.resize(d_);
        for (int q = 0; q < d_; ++q)
            pt.p[q] = rng_.normal() / std::sqrt(inv_mass_[q]);
        const double h0 = hamiltonian(pt);
        PhasePoint probe = pt;
        leapfrog(probe, eps);
        double p_accept = std::exp(h0 - hamiltonian(probe));
        const bool up = p_accept > 0.5;
        for (int i = 0; i < 50; ++i) {
            if (!std::isfinite(p_accept))
                p_accept = 0.0;
            if (up && p_accept <= 0.5)
                break;
            if (!up && p_accept >= 0.5)
                break;
            eps *= up ? 2.0 : 0.5;
            if (eps > 1e7 || eps < 1e-10)
                break;
            probe = pt;
            leapfrog(probe, eps);
            p_accept = std::exp(h0 - hamiltonian(probe));
        }
        return eps;
    }

    bool uturn(const PhasePoint& minus, const PhasePoint& plus) const {
        const Eigen::VectorXd span = plus.z - minus.z;
        return span.dot(inv_mass_.cwiseProduct(minus.p)) < 0.0 ||
               span.dot(inv_mass_.cwiseProduct(plus.p)) < 0.0;
    }

    struct Tree {
        PhasePoint minus, plus, prop;
        double logw = kNegInf;
        bool bad = false; // divergent or turning
        double accept_sum = 0.0;
        long accept_n = 0;
        bool divergent = false;
    };

    Tree build_tree(int depth, const PhasePoint& from, int dir, double h0) {
        if (depth == 0) {
            Tree leaf;
            leaf.minus = from;
            leapfrog(leaf.minus, dir * eps_);
            leaf.plus = leaf.minus;
            leaf.prop = leaf.minus;
            const double h = hamiltonian(leaf.minus);
            const double dh = h0 - h;
            leaf.logw = std::isfinite(h) ? dh : kNegInf;
            leaf.divergent = !std::isfinite(h) || dh < -1000.0;
            leaf.bad = leaf.divergent;
            leaf.accept_sum = std::isfinite(dh) ? std::min(1.0, std::exp(dh)) : 0.0;
            leaf.accept_n = 1;
            return leaf;
        }
        Tree first = build_tree(depth - 1, from, dir, h0);
        if (first.bad)
            return first;
        Tree second = build_tree(depth - 1, dir > 0 ? first.plus : first.minus, dir, h0);
        Tree merged;
        merged.minus = dir > 0 ? first.minus : second.minus;
        merged.plus = dir > 0 ? second.plus : first.plus;
        merged.logw = log_add_exp(first.logw, second.logw);
        merged.accept_sum = first.accept_sum + second.accept_sum;
        merged.accept_n = first.accept_n + second.accept_n;
        merged.divergent = second.divergent;
        merged.bad = second.bad || uturn(merged.minus, merged.plus);
        // multinomial sampling within the subtree
        const double pick = std::exp(second.logw - merged.logw);
        merged.prop = rng_.uniform() < pick ? second.prop : first.prop;
        return merged;
    }

    // one NUTS transition; returns the mean acceptance statistic
    double transition(PhasePoint& cur, ChainStats* stats) {
        for (int q = 0; q < d_; ++q)
            cur.p[q] = rng_.normal() / std::sqrt(inv_mass_[q]);
        const double h0 = hamiltonian(cur);

        PhasePoint minus = cur, plus = cur, prop = cur;
        double logw_total = 0.0; // weight of the initial point relative to h0
        double accept_sum = 0.0;
        long accept_n = 0;
        for (int depth = 0; depth < cfg_.max_tree_depth; ++depth) {
            const int dir = rng_.uniform() < 0.5 ? -1 : 1;
            Tree sub = build_tree(depth, dir > 0 ? plus : minus, dir, h0);
            accept_sum += sub.accept_sum;
            accept_n += sub.accept_n;
            if (sub.bad) {
                if (stats && sub.divergent)
                    ++stats->divergences;
                break;
            }
            // biased progressive sampling toward the new subtree
            const double pick = std::exp(sub.logw - logw_total);
            if (rng_.uniform() < pick)
                prop = sub.prop;
            logw_total = log_add_exp(logw_total, sub.logw);
            if (dir > 0)
                plus = sub.plus;
            else
                minus = sub.minus;
            if (uturn(minus, plus))
                break;
            if (stats && depth + 1 == cfg_.max_tree_depth)
                ++stats->max_depth_hits;
        }
        cur = prop;
        return accept_n ? accept_sum / accept_n : 0.0;
    }

    const UnconstrainedTarget& t_;
    const SamplerConfig& cfg_;
    Rng& rng_;
    int d_;
    Eigen::VectorXd inv_mass_;
    double eps_ = 1.0;
    DualAveraging da_;
};

ChainOutput run_random_walk(const UnconstrainedTarget& t, const SamplerConfig& cfg,
                            Rng& rng) {
    const int d = t.dim();
    ChainOutput out;
    out.draws.resize(cfg.draws, d);

    Eigen::VectorXd z(d);
    double logp = kNegInf;
    for (int attempt = 0; attempt <= 100; ++attempt) {
        for (int q = 0; q < d; ++q)
            z[q] = rng.uniform(-2.0, 2.0);
        logp = t.logp(z);
        if (logp != kNegInf)
            break;
        if (attempt == 100)
            throw DomainError("cannot find a usable starting point");
    }

    Welford wf;
    wf.init(d);
    Eigen::VectorXd scale = Eigen::VectorXd::Ones(d);
    double log_lambda = std::log(2.38 / std::sqrt(static_cast<double>(d)));
    double accept_sum = 0.0;
    long accept_n = 0;

    Eigen::VectorXd zp(d);
    for (int it = 0; it < cfg.warmup + cfg.draws; ++it) {
        const bool warm = it < cfg.warmup;
        const double lambda = std::exp(log_lambda);
        for (int q = 0; q < d; ++q)
            zp[q] = z[q] + lambda * scale[q] * rng.normal();
        const double lp = t.logp(zp);
        const double a = std::min(1.0, std::exp(lp - logp));
        if (rng.uniform() < a) {
            z = zp;
            logp = lp;
        }
        if (warm) {
            wf.add(z);
            log_lambda += (a - 0.234) / std::pow(it + 1.0, 0.7);
            if (wf.n >= 10) {
                const Eigen::VectorXd var = wf.variance();
                const double n = static_cast<double>(wf.n);
                for (int q = 0; q < d; ++q)
                    scale[q] = std::sqrt(var[q] * (n / (n + 5.0)) + 1e-3 * (5.0 / (n + 5.0)));
            }
        } else {
            accept_sum += a;
            ++accept_n;
            out.draws.row(it - cfg.warmup) = t.constrain(z).transpose();
        }
    }
    out.stats.mean_accept = accept_n ? accept_sum / accept_n : 0.0;
    out.stats.step_size = std::exp(log_lambda);
    return out;
}

} // namespace

ChainOutput run_chain(const Posterior& post, const SamplerConfig& cfg,
                      std::uint64_t chain_seed) {
    if (cfg.draws < 1 || cfg.warmup < 0)
        throw DomainError("sampler needs draws >= 1 and warmup >= 0");
    UnconstrainedTarget target(post);
    Rng rng(chain_seed);
    if (cfg.kind == SamplerConfig::RandomWalk)
        return run_random_walk(target, cfg, rng);
    NutsChain chain(target, cfg, rng);
    return chain.run();
}

std::vector<ChainOutput> run_chains(const Posterior& post, const SamplerConfig& cfg) {
    std::vector<ChainOutput> out;
    for (int c = 0; c < cfg.chains; ++c)
        out.push_back(run_chain(post, cfg, Rng::derive(cfg.seed, c)));
    return out;
}

} // namespace kfp
