#include "kfp/common.hpp"
#include "kfp/dataset.hpp"
#include "kfp/parameters.hpp"
#include "kfp/posterior.hpp"
#include "kfp/simulate.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <vector>

using namespace kfp;
using Eigen::VectorXd;

namespace {

ModelTemplate chain_template() {
    return ModelTemplate(ts::chain_graph(), ts::chain_x_total());
}

ScaledModel chain_model() {
    return compile_scaled(ts::chain_graph(), ts::chain_x_total());
}

Dataset chain_dataset(double sd, std::uint64_t seed, int points = 6) {
    NoiseSpec noise;
    noise.relative_sd = sd;
    noise.seed = seed;
    return gen_dataset(chain_model(), points, 20.0, noise);
}

// likelihood recomputed from scratch: exact trajectory via the
// eigendecomposition solver plus the Gaussian formula, nothing shared with
// the Posterior internals
double hand_logp(const ScaledModel& m, const Dataset& d, double c_noise,
                 const Posterior& post) {
    double lp = 0.0;
    for (int q = 0; q < post.dim(); ++q)
        lp -= std::log(post.upper(q) - post.lower(q));
    const Trajectory tr = solve_exact(m, d.times);
    for (int t = 0; t < d.n_times(); ++t)
        for (int col = 0; col < d.n_nodes(); ++col) {
            int node = -1;
            for (int i = 0; i < int(m.names.size()); ++i)
                if (m.names[i] == d.nodes[col])
                    node = i;
            REQUIRE(node >= 0);
            const double mu = tr.values(t, node);
            const double s = std::max(c_noise * mu, Posterior::kSigmaFloor);
            for (int r = 0; r < d.replicates; ++r) {
                const double z = (d.at(t, col, r) - mu) / s;
                lp += -0.5 * z * z - std::log(s) - 0.5 * std::log(2.0 * M_PI);
            }
        }
    return lp;
}

VectorXd interior_point(const Posterior& post, Rng& rng) {
    VectorXd theta(post.dim());
    for (int q = 0; q < post.dim(); ++q) {
        const double lo = post.lower(q), hi = post.upper(q);
        theta[q] = lo + (0.15 + 0.7 * rng.uniform()) * (hi - lo);
    }
    return theta;
}

} // namespace

TEST_CASE("default priors follow the parameter kinds") {
    const ParameterSpec spec = free_parameters(ts::chain_graph(), true);
    const PriorSpec prior = PriorSpec::defaults_for(spec);
    REQUIRE(prior.bounds.size() == 4);
    CHECK(prior.bounds[0] == std::pair<double, double>(0.0, 3.0)); // k_X1
    CHECK(prior.bounds[1] == std::pair<double, double>(0.0, 3.0)); // k_X2
    CHECK(prior.bounds[2] == std::pair<double, double>(0.0, 1.0)); // alpha_X1
    CHECK(prior.bounds[3] == std::pair<double, double>(0.0, 1.0)); // alpha_X2
    CHECK(prior.noise == std::pair<double, double>(0.0, 0.5));
}

TEST_CASE("posterior dimensions and names") {
    const ModelTemplate tmpl = chain_template();
    const PriorSpec prior = PriorSpec::defaults_for(tmpl.spec());
    const Dataset d = chain_dataset(0.025, 1);

    const Posterior infer(d, tmpl, prior, SigmaMode::infer());
    REQUIRE(infer.dim() == 5);
    CHECK(infer.names() == std::vector<std::string>{"k_X1", "k_X2", "alpha_X1",
                                                    "alpha_X2", "sigma_rel"});
    CHECK(infer.lower(4) == 0.0);
    CHECK(infer.upper(4) == 0.5);

    const Posterior fixed(d, tmpl, prior, SigmaMode::fixed(0.025));
    REQUIRE(fixed.dim() == 4);
    CHECK(fixed.names().back() == "alpha_X2");
    CHECK(fixed.upper(0) == 3.0);
    CHECK(fixed.upper(2) == 1.0);
}

TEST_CASE("outside the prior box the density vanishes") {
    const ModelTemplate tmpl = chain_template();
    const PriorSpec prior = PriorSpec::defaults_for(tmpl.spec());
    const Posterior post(chain_dataset(0.025, 2), tmpl, prior,
                         SigmaMode::fixed(0.025));

    VectorXd theta(4);
    theta << 0.35, 0.30, 0.25, 0.40;
    CHECK(std::isfinite(post.logp(theta)));

    const double neg_inf = -std::numeric_limits<double>::infinity();
    for (int q = 0; q < 4; ++q) {
        VectorXd t = theta;
        t[q] = post.lower(q); // the box is open
        CHECK(post.logp(t) == neg_inf);
        t[q] = post.upper(q);
        CHECK(post.logp(t) == neg_inf);
        t[q] = post.upper(q) + 0.5;
        CHECK(post.logp(t) == neg_inf);
    }

    VectorXd wrong(3);
    wrong << 0.3, 0.3, 0.3;
    CHECK_THROWS_AS(post.logp(wrong), DomainError);
}

TEST_CASE("empty dataset leaves the flat prior") {
    const ModelTemplate tmpl = chain_template();
    const PriorSpec prior = PriorSpec::defaults_for(tmpl.spec());
    Dataset empty;
    empty.replicates = 1;
    const Posterior post(empty, tmpl, prior, SigmaMode::infer());

    // -(2 log 3 + 2 log 1 + log 0.5)
    const double expected = -(2.0 * std::log(3.0) + std::log(0.5));
    VectorXd theta(5);
    theta << 0.35, 0.30, 0.25, 0.40, 0.1;
    CHECK(post.logp(theta) == doctest::Approx(expected).epsilon(1e-14));
    VectorXd other(5);
    other << 1.5, 2.0, 0.9, 0.1, 0.4;
    CHECK(post.logp(other) == doctest::Approx(expected).epsilon(1e-14));

    VectorXd grad;
    CHECK(post.logp_grad(theta, grad) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(grad.isZero(0.0));
}

TEST_CASE("log density matches a from-scratch recomputation") {
    const ModelTemplate tmpl = chain_template();
    const PriorSpec prior = PriorSpec::defaults_for(tmpl.spec());
    const Dataset d = chain_dataset(0.05, 3);
    Rng rng(913);

    SUBCASE("fixed noise scale") {
        const Posterior post(d, tmpl, prior, SigmaMode::fixed(0.025));
        for (int rep = 0; rep < 10; ++rep) {
            const VectorXd theta = interior_point(post, rng);
            ScaledModel m;
            REQUIRE(tmpl.evaluate(theta, m));
            CHECK(post.logp(theta) ==
                  doctest::Approx(hand_logp(m, d, 0.025, post)).epsilon(1e-10));
        }
    }
    SUBCASE("inferred noise scale reads the trailing coordinate") {
        const Posterior post(d, tmpl, prior, SigmaMode::infer());
        for (int rep = 0; rep < 10; ++rep) {
            const VectorXd theta = interior_point(post, rng);
            ScaledModel m;
            REQUIRE(tmpl.evaluate(theta.head(4), m));
            CHECK(post.logp(theta) ==
                  doctest::Approx(hand_logp(m, d, theta[4], post)).epsilon(1e-10));
        }
    }
    SUBCASE("tiny scale factors engage the sigma floor") {
        const Posterior post(d, tmpl, prior, SigmaMode::fixed(1e-6));
        VectorXd theta(4);
        theta << 0.35, 0.30, 0.25, 0.40;
        ScaledModel m;
        REQUIRE(tmpl.evaluate(theta, m));
        // every prediction is above 0.25, so c*mu < 1e-3 everywhere and the
        // hand formula runs entirely on the floor
        CHECK(post.logp(theta) ==
              doctest::Approx(hand_logp(m, d, 1e-6, post)).epsilon(1e-10));
    }
}

TEST_CASE("noiseless data peaks near the truth") {
    const ModelTemplate tmpl = chain_template();
    const PriorSpec prior = PriorSpec::defaults_for(tmpl.spec());
    NoiseSpec clean;
    clean.relative_sd = 0.0;
    const Dataset d = gen_dataset(chain_model(), 10, 30.0, clean);
    const Posterior post(d, tmpl, prior, SigmaMode::fixed(0.025));

    VectorXd truth(4);
    truth << 0.35, 0.30, 0.25, 0.40;

    for (int q = 0; q < 4; ++q) {
        double best_x = 0.0, best_lp = -std::numeric_limits<double>::infinity();
        for (int g = 0; g <= 200; ++g) {
            VectorXd theta = truth;
            const double lo = std::max(post.lower(q) + 1e-3, truth[q] - 0.2);
            const double hi = std::min(post.upper(q) - 1e-3, truth[q] + 0.2);
            theta[q] = lo + (hi - lo) * g / 200.0;
            const double lp = post.logp(theta);
            if (lp > best_lp) {
                best_lp = lp;
                best_x = theta[q];
            }
        }
        CHECK(std::abs(best_x - truth[q]) < 0.05);
    }
}

TEST_CASE("analytic gradients agree with finite differences") {
    const ModelTemplate chain = chain_template();
    const ModelTemplate cycle(ts::cycle_graph(),
                              Eigen::Vector3d(2.0, 1.0, 0.5));
    struct Setup {
        const ModelTemplate* tmpl;
        Dataset data;
        SigmaMode sigma;
    };
    const Dataset chain_data = chain_dataset(0.05, 4);
    NoiseSpec noise;
    noise.relative_sd = 0.05;
    noise.seed = 5;
    const Dataset cycle_data = gen_dataset(
        compile_scaled(ts::cycle_graph(), Eigen::Vector3d(2.0, 1.0, 0.5)), 5,
        8.0, noise);
    const std::vector<Setup> setups{
        {&chain, chain_data, SigmaMode::fixed(0.025)},
        {&chain, chain_data, SigmaMode::infer()},
        {&cycle, cycle_data, SigmaMode::fixed(0.05)},
        {&cycle, cycle_data, SigmaMode::infer()},
    };

    Rng rng(7211);
    for (const Setup& setup : setups) {
        const Posterior post(setup.data, *setup.tmpl,
                             PriorSpec::defaults_for(setup.tmpl->spec()),
                             setup.sigma);
        for (int rep = 0; rep < 5; ++rep) {
            // keep sigma_rel away from zero so c*mu stays above the floor
            VectorXd theta = interior_point(post, rng);
            VectorXd grad;
            const double lp = post.logp_grad(theta, grad);
            // the gradient path integrates a larger augmented system, so the
            // two values agree only to rounding
            CHECK(lp == doctest::Approx(post.logp(theta)).epsilon(1e-12));
            REQUIRE(grad.size() == post.dim());
            for (int q = 0; q < post.dim(); ++q) {
                const double h = 1e-6;
                VectorXd up = theta, dn = theta;
                up[q] += h;
                dn[q] -= h;
                const double fd = (post.logp(up) - post.logp(dn)) / (2.0 * h);
                CHECK(grad[q] ==
                      doctest::Approx(fd).epsilon(1e-4).scale(std::abs(fd) + 1.0));
            }
        }
    }
}

TEST_CASE("dataset columns may cover a subset of nodes") {
    const ModelTemplate tmpl = chain_template();
    const ScaledModel m = chain_model();
    Dataset d;
    d.times = Eigen::Vector2d(2.0, 5.0);
    d.nodes = {"X2"};
    d.replicates = 1;
    const Trajectory tr = solve_exact(m, d.times);
    d.values = {tr.values(0, 1) + 0.01, tr.values(1, 1) - 0.02};

    const Posterior post(d, tmpl, PriorSpec::defaults_for(tmpl.spec()),
                         SigmaMode::fixed(0.025));
    const VectorXd truth = tmpl.theta_from(m);
    CHECK(post.logp(truth) ==
          doctest::Approx(hand_logp(m, d, 0.025, post)).epsilon(1e-10));
}

TEST_CASE("posterior construction validates its inputs") {
    const ModelTemplate tmpl = chain_template();
    const Dataset d = chain_dataset(0.025, 6);
    const PriorSpec good = PriorSpec::defaults_for(tmpl.spec());

    SUBCASE("bounds count must match the free parameters") {
        PriorSpec p = good;
        p.bounds.pop_back();
        CHECK_THROWS_WITH_AS(Posterior(d, tmpl, p, SigmaMode::infer()),
                             "prior needs one bound pair per free parameter",
                             DomainError);
    }
    SUBCASE("bounds must stay inside the parameter domain") {
        PriorSpec p = good;
        p.bounds[2] = {0.0, 1.5}; // alpha cannot exceed one
        CHECK_THROWS_WITH_AS(Posterior(d, tmpl, p, SigmaMode::infer()),
                             "prior for alpha_X1 leaves the parameter domain",
                             DomainError);
        p.bounds[2] = {-0.2, 0.9};
        CHECK_THROWS_AS(Posterior(d, tmpl, p, SigmaMode::infer()), DomainError);
        p.bounds[2] = {0.6, 0.6}; // empty interval
        CHECK_THROWS_AS(Posterior(d, tmpl, p, SigmaMode::infer()), DomainError);
    }
    SUBCASE("noise prior and fixed scale") {
        PriorSpec p = good;
        p.noise = {0.5, 0.2};
        CHECK_THROWS_AS(Posterior(d, tmpl, p, SigmaMode::infer()), DomainError);
        p.noise = {-0.1, 0.5};
        CHECK_THROWS_AS(Posterior(d, tmpl, p, SigmaMode::infer()), DomainError);
        // the same prior is ignored when sigma is fixed
        CHECK_NOTHROW(Posterior(d, tmpl, p, SigmaMode::fixed(0.025)));
        CHECK_THROWS_AS(Posterior(d, tmpl, good, SigmaMode::fixed(0.0)),
                        DomainError);
        CHECK_THROWS_AS(Posterior(d, tmpl, good, SigmaMode::fixed(-1.0)),
                        DomainError);
    }
    SUBCASE("dataset nodes must exist in the model") {
        Dataset bad = d;
        bad.nodes[1] = "X9";
        CHECK_THROWS_WITH_AS(Posterior(bad, tmpl, good, SigmaMode::infer()),
                             "dataset node \"X9\" is not in the model",
                             DomainError);
    }
}

TEST_CASE("log density is deterministic") {
    const ModelTemplate tmpl = chain_template();
    const Posterior post(chain_dataset(0.05, 8), tmpl,
                         PriorSpec::defaults_for(tmpl.spec()),
                         SigmaMode::infer());
    VectorXd theta(5);
    theta << 0.4, 0.28, 0.22, 0.45, 0.07;
    const double a = post.logp(theta);
    const double b = post.logp(theta);
    CHECK(a == b);
    VectorXd g1, g2;
    const double c = post.logp_grad(theta, g1);
    CHECK(post.logp_grad(theta, g2) == c);
    CHECK(g1 == g2);
    CHECK(c == doctest::Approx(a).epsilon(1e-12));
}
