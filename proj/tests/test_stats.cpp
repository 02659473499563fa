#include "kfp/common.hpp"
#include "kfp/rng.hpp"
#include "kfp/stats.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

using namespace kfp;

namespace {

std::vector<double> normals(Rng& rng, int n, double mu = 0.0, double sd = 1.0) {
    std::vector<double> v(n);
    for (double& x : v)
        x = mu + sd * rng.normal();
    return v;
}

std::vector<double> linear_grid(double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i)
        v[i] = lo + (hi - lo) * i / (n - 1);
    return v;
}

} // namespace

TEST_CASE("quantile interpolates order statistics") {
    // hand values for {1,2,3,4}: h = 3q, linear between neighbors
    const std::vector<double> s{3.0, 1.0, 4.0, 2.0}; // unsorted on purpose
    CHECK(quantile(s, 0.0) == 1.0);
    CHECK(quantile(s, 1.0) == 4.0);
    CHECK(quantile(s, 0.5) == 2.5);
    CHECK(quantile(s, 0.25) == 1.75);
    CHECK(quantile(s, 1.0 / 3.0) == doctest::Approx(2.0).epsilon(1e-15));

    CHECK(quantile({7.0}, 0.3) == 7.0);
    CHECK_THROWS_AS(quantile({}, 0.5), DomainError);
}

TEST_CASE("credible interval on a linear sample is exact") {
    // order statistics of linspace(0,1) are the line itself, so the
    // interpolated quantile at q is q exactly up to rounding
    const std::vector<double> s = linear_grid(0.0, 1.0, 4001);
    const Interval iv = credible_interval(s);
    CHECK(iv.lo == doctest::Approx(0.025).epsilon(1e-12));
    CHECK(iv.hi == doctest::Approx(0.975).epsilon(1e-12));
    CHECK(iv.width() == doctest::Approx(0.95).epsilon(1e-12));

    const Interval half = credible_interval(s, 0.5);
    CHECK(half.lo == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(half.hi == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("credible interval on uniform draws") {
    Rng rng(101);
    std::vector<double> s(1000000);
    for (double& x : s)
        x = rng.uniform();
    const Interval iv = credible_interval(s);
    CHECK(std::abs(iv.lo - 0.025) < 0.005);
    CHECK(std::abs(iv.hi - 0.975) < 0.005);
}

TEST_CASE("credible interval input validation") {
    const std::vector<double> tiny(39, 1.0);
    CHECK_THROWS_AS(credible_interval(tiny), DomainError);

    const std::vector<double> flat(40, 2.5);
    const Interval iv = credible_interval(flat);
    CHECK(iv.lo == 2.5);
    CHECK(iv.hi == 2.5);
    CHECK(iv.width() == 0.0);

    const std::vector<double> s = linear_grid(0.0, 1.0, 100);
    CHECK_THROWS_AS(credible_interval(s, 0.0), DomainError);
    CHECK_THROWS_AS(credible_interval(s, 1.0), DomainError);
    CHECK_THROWS_AS(credible_interval(s, -0.5), DomainError);
}

TEST_CASE("silverman bandwidth follows the formula") {
    const std::vector<double> s{1.0, 2.0, 3.0, 4.0, 5.0};
    // sd = sqrt(2.5), iqr = 2, so the spread is iqr/1.34 < sd
    const double expected = 0.9 * (2.0 / 1.34) * std::pow(5.0, -0.2);
    CHECK(silverman_bandwidth(s) == doctest::Approx(expected).epsilon(1e-15));

    // zero iqr falls back to the standard deviation
    const std::vector<double> spike{0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 2.0};
    const double sd = std::sqrt(2.0 / 7.0);
    CHECK(silverman_bandwidth(spike) ==
          doctest::Approx(0.9 * sd * std::pow(8.0, -0.2)).epsilon(1e-15));
}

TEST_CASE("kde density integrates to one") {
    Rng rng(55);
    const std::vector<double> s = normals(rng, 2000, 1.0, 0.5);
    Eigen::VectorXd grid(801);
    for (int i = 0; i < grid.size(); ++i)
        grid[i] = -3.0 + 8.0 * i / 800.0;
    const Eigen::VectorXd dens = kde_density(s, grid);
    double integral = 0.0;
    for (int i = 0; i + 1 < grid.size(); ++i)
        integral += 0.5 * (dens[i] + dens[i + 1]) * (grid[i + 1] - grid[i]);
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(dens.minCoeff() >= 0.0);

    // degenerate sample has zero bandwidth and an all-zero density
    const std::vector<double> flat(50, 3.0);
    CHECK(kde_density(flat, grid).isZero(0.0));
}

TEST_CASE("kde mode finds the peak") {
    SUBCASE("constant sample returns the constant") {
        CHECK(kde_mode(std::vector<double>(12, 4.25)) == 4.25);
    }
    SUBCASE("too few samples") {
        CHECK_THROWS_AS(kde_mode(std::vector<double>(9, 1.0)), DomainError);
    }
    SUBCASE("unimodal normal") {
        Rng rng(77);
        const std::vector<double> s = normals(rng, 100000, 3.7, 0.5);
        CHECK(std::abs(kde_mode(s) - 3.7) < 0.05);
    }
    SUBCASE("dominant component of a mixture") {
        Rng rng(78);
        std::vector<double> s;
        s.reserve(100000);
        for (int i = 0; i < 100000; ++i) {
            if (rng.uniform() < 0.7)
                s.push_back(0.25 * rng.normal());
            else
                s.push_back(3.0 + 0.25 * rng.normal());
        }
        CHECK(std::abs(kde_mode(s)) < 0.05);
    }
    SUBCASE("mode lies inside the sample range") {
        Rng rng(79);
        for (int rep = 0; rep < 20; ++rep) {
            const std::vector<double> s = normals(rng, 50, rng.uniform(), 2.0);
            const auto [mn, mx] = std::minmax_element(s.begin(), s.end());
            const double mode = kde_mode(s);
            CHECK(mode >= *mn);
            CHECK(mode <= *mx);
        }
    }
}

TEST_CASE("split rhat separates mixed from unmixed chains") {
    SUBCASE("iid chains sit at one") {
        Rng rng(201);
        std::vector<std::vector<double>> chains;
        for (int c = 0; c < 4; ++c)
            chains.push_back(normals(rng, 1000));
        const double r = split_rhat(chains);
        CHECK(r >= 1.0);
        CHECK(r < 1.02);
    }
    SUBCASE("disagreeing constant chains blow up") {
        const std::vector<std::vector<double>> chains{
            std::vector<double>(100, 0.0), std::vector<double>(100, 1.0)};
        CHECK(split_rhat(chains) == std::numeric_limits<double>::infinity());
    }
    SUBCASE("agreeing constant chains are fine") {
        const std::vector<std::vector<double>> chains{
            std::vector<double>(100, 2.0), std::vector<double>(100, 2.0)};
        CHECK(split_rhat(chains) == 1.0);
    }
    SUBCASE("location-shifted chains are flagged") {
        Rng rng(202);
        const std::vector<std::vector<double>> chains{
            normals(rng, 500, 0.0), normals(rng, 500, 3.0)};
        CHECK(split_rhat(chains) > 1.05);
    }
    SUBCASE("a trend within one chain is flagged by the split") {
        // first half near 0, second half near 3: plain rhat on the two
        // halves as separate chains is what the split construction sees
        std::vector<double> drift(1000);
        for (int i = 0; i < 1000; ++i)
            drift[i] = i < 500 ? 0.0 : 3.0;
        std::vector<double> flat(1000, 1.5);
        CHECK(split_rhat({drift, flat}) ==
              std::numeric_limits<double>::infinity());
    }
    SUBCASE("input validation") {
        CHECK_THROWS_AS(split_rhat({std::vector<double>(100, 0.0)}),
                        DomainError);
        CHECK_THROWS_AS(split_rhat({std::vector<double>{1.0},
                                    std::vector<double>{2.0}}),
                        DomainError);
    }
}

TEST_CASE("bulk ess tracks the autocorrelation time") {
    SUBCASE("iid chains keep most of the sample") {
        Rng rng(301);
        std::vector<std::vector<double>> chains;
        for (int c = 0; c < 4; ++c)
            chains.push_back(normals(rng, 1000));
        const double ess = ess_bulk(chains);
        CHECK(ess > 0.8 * 4000);
        CHECK(ess < 1.25 * 4000);
    }
    SUBCASE("ar(1) chains lose the expected factor") {
        // integrated autocorrelation time of AR(1) with phi = 0.9 is
        // (1+phi)/(1-phi) = 19
        Rng rng(302);
        const double phi = 0.9;
        std::vector<std::vector<double>> chains;
        for (int c = 0; c < 4; ++c) {
            std::vector<double> x(5000);
            x[0] = rng.normal();
            for (std::size_t i = 1; i < x.size(); ++i)
                x[i] = phi * x[i - 1] +
                       std::sqrt(1.0 - phi * phi) * rng.normal();
            chains.push_back(std::move(x));
        }
        const double total = 4.0 * 5000.0;
        const double ess = ess_bulk(chains);
        CHECK(ess > total / 19.0 / 2.0);
        CHECK(ess < total / 19.0 * 2.0);
    }
    SUBCASE("constant chains count every draw") {
        const std::vector<std::vector<double>> chains{
            std::vector<double>(100, 5.0), std::vector<double>(100, 5.0)};
        CHECK(ess_bulk(chains) == 200.0);
    }
    SUBCASE("input validation") {
        CHECK_THROWS_AS(ess_bulk({std::vector<double>(100, 0.0)}), DomainError);
    }
}

TEST_CASE("diagnostics run per parameter") {
    Rng rng(401);
    std::vector<Eigen::MatrixXd> draws;
    for (int c = 0; c < 2; ++c) {
        Eigen::MatrixXd m(400, 2);
        for (int i = 0; i < 400; ++i) {
            m(i, 0) = rng.normal();
            m(i, 1) = c; // chains disagree on the second parameter
        }
        draws.push_back(std::move(m));
    }
    const Diagnostics d = compute_diagnostics(draws);
    REQUIRE(d.rhat.size() == 2);
    REQUIRE(d.ess.size() == 2);
    CHECK(d.rhat[0] < 1.05);
    CHECK(d.rhat[1] == std::numeric_limits<double>::infinity());
    CHECK(d.ess[0] > 400.0);

    CHECK_THROWS_AS(compute_diagnostics({draws[0]}), DomainError);
}

TEST_CASE("ks distance against the uniform") {
    CHECK(ks_uniform({0.5}, 0.0, 1.0) == 0.5);
    CHECK(ks_uniform({0.25, 0.75}, 0.0, 1.0) == 0.25);

    // midpoints of n equal bins realize the 1/(2n) optimum
    const int n = 50;
    std::vector<double> mid(n);
    for (int i = 0; i < n; ++i)
        mid[i] = (i + 0.5) / n;
    CHECK(ks_uniform(mid, 0.0, 1.0) == doctest::Approx(0.01).epsilon(1e-12));

    // out-of-range samples clamp to the cdf endpoints
    CHECK(ks_uniform({-1.0, 2.0}, 0.0, 1.0) == 0.5);

    Rng rng(501);
    std::vector<double> s(10000);
    for (double& x : s)
        x = 2.0 + 3.0 * rng.uniform();
    CHECK(ks_uniform(s, 2.0, 5.0) < 1.63 / std::sqrt(10000.0));

    CHECK_THROWS_AS(ks_uniform({}, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(ks_uniform({0.5}, 1.0, 1.0), DomainError);
}

TEST_CASE("normal quantile inverts the standard cdf") {
    CHECK(normal_quantile(0.5) == 0.0);
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963985).epsilon(1e-8));
    CHECK(normal_quantile(0.841344746) == doctest::Approx(1.0).epsilon(1e-6));
    for (double p : {0.01, 0.1, 0.3, 0.45}) {
        CHECK(normal_quantile(p) ==
              doctest::Approx(-normal_quantile(1.0 - p)).epsilon(1e-12));
    }
}
