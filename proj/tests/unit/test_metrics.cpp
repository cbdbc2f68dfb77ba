#include "doctest.h"

#include <cmath>
#include <random>

#include "flexopt/metrics.hpp"

using namespace flexopt;

namespace {

TimeSeries ts(std::vector<double> v) { return TimeSeries(std::move(v)); }

struct Week {
    TimeSeries prices, cefs, purchase;
};

Week random_week(unsigned seed, std::size_t n = 24 * 28) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> p(45.0, 15.0);
    std::uniform_real_distribution<double> c(0.1, 0.7), b(0.0, 2000.0);
    std::vector<double> pv(n), cv(n), bv(n);
    for (std::size_t t = 0; t < n; ++t) {
        pv[t] = p(rng);
        cv[t] = c(rng);
        bv[t] = b(rng);
    }
    return {ts(pv), ts(cv), ts(bv)};
}

}  // namespace

TEST_CASE("energy-weighted averages") {
    CHECK(ewap(ts({10, 30}), ts({1, 0})) == 10.0);
    CHECK(ewacef(ts({0.2, 0.6}), ts({0, 2})) == 0.6);
    CHECK(twap(ts({10, 30})) == 20.0);
    CHECK(twap(ts({7.5, 7.5, 7.5})) == 7.5);
    CHECK(twap(ts({42.0})) == 42.0);
    CHECK(twacef(ts({0.3})) == 0.3);

    const Week w = random_week(1);
    const TimeSeries flat(std::vector<double>(w.prices.size(), 350.0));
    CHECK(std::abs(ewap(w.prices, flat) - twap(w.prices)) <= 1e-12 * std::abs(twap(w.prices)));
    CHECK(std::abs(ewacef(w.cefs, flat) - twacef(w.cefs)) <= 1e-12);

    const double e = ewap(w.prices, w.purchase);
    CHECK(e >= w.prices.min());
    CHECK(e <= w.prices.max());
    const double c = ewacef(w.cefs, w.purchase);
    CHECK(c >= w.cefs.min());
    CHECK(c <= w.cefs.max());

    CHECK_THROWS_AS(ewap(ts({1, 2}), ts({0, 0})), UndefinedMetric);
    CHECK_THROWS_AS(ewacef(ts({1, 2}), ts({0, 0})), UndefinedMetric);
    CHECK_THROWS_AS(ewap(ts({1, 2}), ts({1})), InvalidParameter);
    CHECK_THROWS_AS(ewap(ts({1, 2}), ts({1, -1})), InvalidParameter);
}

TEST_CASE("rates and cost ratios") {
    CHECK(pi_rate(10, 20) == 0.5);
    CHECK(eps_rate(0.3, 0.6) == 0.5);
    CHECK_THROWS_AS(pi_rate(10, 0), UndefinedMetric);
    CHECK(tcer(40, 0.4) == doctest::Approx(100.0).epsilon(1e-15));
    CHECK(ecer(50, 0.25) == 200.0);
    CHECK_THROWS_AS(tcer(40, 0), UndefinedMetric);
    CHECK(omega(ecer(40, 0.4), tcer(40, 0.4)) == 1.0);

    const Week w = random_week(2);
    const TimeSeries flat(std::vector<double>(w.prices.size(), 1.0));
    const MetricSet f = compute_metrics(w.prices, w.cefs, flat);
    CHECK(std::abs(*f.pi_rate - 1.0) <= 1e-12);
    CHECK(std::abs(*f.eps_rate - 1.0) <= 1e-12);
    CHECK(std::abs(*f.omega - 1.0) <= 1e-12);
}

TEST_CASE("metric identities") {
    for (unsigned seed = 10; seed < 20; ++seed) {
        const Week w = random_week(seed);
        const MetricSet m = compute_metrics(w.prices, w.cefs, w.purchase);
        REQUIRE(m.omega.has_value());
        CHECK(std::abs(*m.omega * *m.tcer - *m.ecer) <= 1e-9 * std::abs(*m.ecer));
        CHECK(std::abs(*m.pi_rate - *m.ewap / *m.twap) <= 1e-9 * std::abs(*m.pi_rate));

        // Energy-weighted combination of per-week values equals the whole-window value.
        double num = 0.0, den = 0.0;
        for (std::size_t first = 0; first < w.prices.size(); first += 168) {
            const MetricSet part = compute_metrics(w.prices, w.cefs, w.purchase, first, 168);
            const double energy = w.purchase.window(first, 168).sum();
            num += *part.ewap * energy;
            den += energy;
        }
        CHECK(std::abs(num / den - *m.ewap) <= 1e-9 * std::abs(*m.ewap));

        for (double kappa : {1e-3, 0.37, 2.0, 1234.5}) {
            std::vector<double> sp(w.prices.size()), sc(w.cefs.size());
            for (std::size_t t = 0; t < sp.size(); ++t) {
                sp[t] = kappa * w.prices[t];
                sc[t] = kappa * w.cefs[t];
            }
            const MetricSet k = compute_metrics(ts(sp), ts(sc), w.purchase);
            CHECK(std::abs(*k.pi_rate - *m.pi_rate) <= 1e-12);
            CHECK(std::abs(*k.eps_rate - *m.eps_rate) <= 1e-12);
        }
    }
}

TEST_CASE("metric set on degenerate windows") {
    const MetricSet m = compute_metrics(ts({10, 20}), ts({0.1, 0.2}), ts({0, 0}));
    CHECK(!m.ewap);
    CHECK(!m.pi_rate);
    CHECK(!m.omega);
    CHECK(m.twap == 15.0);
    CHECK(m.peak_buy == 0.0);
    CHECK(m.volume_buy == 0.0);

    const MetricSet v = compute_metrics(ts({10, 20}), ts({0.1, 0.2}), ts({1000, 3000}), 1.0, 2.0);
    CHECK(v.peak_buy == 3000.0);
    CHECK(v.volume_buy == doctest::Approx(8.0));
}

TEST_CASE("pair metrics") {
    const Week w = random_week(3);
    const MetricSet a = compute_metrics(w.prices, w.cefs, w.purchase);
    CHECK(!pair_metrics(a, a).defined);

    MetricSet base, s;
    base.ewap = 60;
    s.ewap = 45;
    base.ewacef = 0.5;
    s.ewacef = 0.4;
    base.pi_rate = 1.2;
    s.pi_rate = 0.9;
    base.eps_rate = 1.1;
    s.eps_rate = 0.95;
    const PairMetrics p = pair_metrics(base, s);
    REQUIRE(p.defined);
    CHECK(p.ecer_pair == doctest::Approx(150.0).epsilon(1e-12));
    CHECK(p.omega_pair == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(p.ecer_pair > 0.0);

    MetricSet missing = s;
    missing.ewap.reset();
    CHECK(!pair_metrics(base, missing).defined);
}

TEST_CASE("decarbonization cost") {
    CHECK(decarbonization_cost(100, 100) == 0.0);
    CHECK(decarbonization_cost(100, 160) == 60.0);
}
