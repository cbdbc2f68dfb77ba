#include "doctest.h"

#include <cmath>
#include <random>

#include "flexopt/core_types.hpp"

using namespace flexopt;

namespace {

// (1+r)^n by repeated multiplication in extended precision.
long double annuity_oracle(long double r, int n) {
    long double q = 1.0L;
    for (int i = 0; i < n; ++i) q *= 1.0L + r;
    return r * q / (q - 1.0L);
}

HeatLevel level(double flow, double ret, double dt = 5.0) { return {"L" + std::to_string(flow), flow, ret, dt}; }

}  // namespace

TEST_CASE("annuity factor") {
    CHECK(annuity_factor(0.10, 1) == doctest::Approx(1.1).epsilon(1e-15));
    CHECK(std::abs(annuity_factor(0.10, 25) - 0.110168) <= 1e-6);
    CHECK(std::abs(annuity_factor(0.10, 20) - 0.117460) <= 1e-6);
    for (int n : {1, 2, 5, 10, 20, 25, 40}) {
        for (double r : {0.01, 0.05, 0.10, 0.25}) {
            CHECK(std::abs(annuity_factor(r, n) - static_cast<double>(annuity_oracle(r, n))) <= 1e-12);
            CHECK(annuity_factor(r, n) * n >= 1.0);
        }
    }
    for (int n = 1; n < 60; ++n) CHECK(annuity_factor(0.1, n + 1) < annuity_factor(0.1, n));
    CHECK(annuity_factor(0.1, 2000) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK_THROWS_AS(annuity_factor(0.0, 10), InvalidParameter);
    CHECK_THROWS_AS(annuity_factor(-0.1, 10), InvalidParameter);
    CHECK_THROWS_AS(annuity_factor(0.1, 0), InvalidParameter);
}

TEST_CASE("carnot cop") {
    const double eta = 0.5;
    CHECK(carnot_cop(level(75, 55), level(7, 12), eta) == doctest::Approx(0.5 * 353.15 / 78).epsilon(1e-12));
    CHECK(std::abs(carnot_cop(level(75, 55), level(7, 12), eta) - 2.2638) <= 1e-4);
    CHECK(std::abs(carnot_cop(level(75, 55), level(10, 15), eta) - 2.3543) <= 1e-4);

    SUBCASE("decreasing in the temperature lift") {
        double prev = kInf;
        for (double src = 60.0; src >= -20.0; src -= 2.5) {
            const double c = carnot_cop(level(75, 55), level(src, src + 5), eta);
            CHECK(c > 0.0);
            CHECK(c < prev);
            prev = c;
        }
    }
    SUBCASE("gaps below one kelvin are rejected") {
        // cond = 80, eva = flow - 5
        CHECK_THROWS_AS(carnot_cop(level(75, 55), level(85, 90), 1.0), DegenerateTemperature);
        CHECK_THROWS_AS(carnot_cop(level(75, 55), level(84.5, 90), 1.0), DegenerateTemperature);
        CHECK_NOTHROW(carnot_cop(level(75, 55), level(84, 90), 1.0));
    }
    CHECK_THROWS_AS(carnot_cop(level(75, 55), level(7, 12), 0.0), InvalidParameter);
    CHECK_THROWS_AS(carnot_cop(level(75, 55), level(7, 12), 1.5), InvalidParameter);
}

TEST_CASE("heat pump modes") {
    HPParams hp;
    hp.sources = {standard_level(HeatLevelId::COOL_7_12), well_level()};
    hp.sinks = {well_level(), standard_level(HeatLevelId::SPACE_75_55)};
    std::vector<std::string> excluded;
    const auto modes = enumerate_hp_modes(hp, &excluded);
    REQUIRE(modes.size() == 3);
    REQUIRE(excluded.size() == 1);
    CHECK(excluded[0].find("WELL->WELL") == 0);
    for (const auto& m : modes) CHECK(!(m.source == "WELL" && m.sink == "WELL"));

    hp.sinks = {level(5, 0)};
    hp.sources = {level(20, 25)};
    excluded.clear();
    CHECK(enumerate_hp_modes(hp, &excluded).empty());
    CHECK(excluded.size() == 1);
}

TEST_CASE("time series arithmetic") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    std::vector<double> v(10000);
    for (auto& x : v) x = u(rng);
    const TimeSeries s(v);
    long double ref = 0.0L, wref = 0.0L, wsum = 0.0L;
    std::vector<double> w(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        ref += v[i];
        w[i] = 1.0 + static_cast<double>(i % 7);
        wref += static_cast<long double>(w[i]) * v[i];
        wsum += w[i];
    }
    const double scale = 1e6 * static_cast<double>(v.size());
    CHECK(std::abs(s.sum() - static_cast<double>(ref)) <= 1e-9 * scale);
    CHECK(std::abs(s.mean() - static_cast<double>(ref / v.size())) <= 1e-9 * 1e6);
    CHECK(std::abs(s.weighted_mean(w) - static_cast<double>(wref / wsum)) <= 1e-9 * 1e6);

    const TimeSeries c(std::vector<double>{3.0, 3.0, 3.0});
    CHECK(c.stddev() == 0.0);
    CHECK(TimeSeries(std::vector<double>{10.0, 30.0}).mean() == 20.0);
    CHECK(s.window(10, 5).size() == 5);
    CHECK(s.window(10, 5)[0] == v[10]);
    CHECK_THROWS_AS(s.window(9998, 5), ValidationError);
    CHECK_THROWS_AS(TimeSeries(std::vector<double>{1.0, NAN}), ValidationError);
    CHECK_THROWS_AS(TimeSeries(std::vector<double>{}), ValidationError);
    CHECK_THROWS_AS(c.weighted_mean({0.0, 0.0, 0.0}), UndefinedMetric);
}

TEST_CASE("parameter validation") {
    BevGroup g;
    g.group_id = "g";
    g.e_cap = 100;
    g.avail = TimeSeries(std::vector<double>{1, 0});
    g.drive = TimeSeries(std::vector<double>{0, 5});
    CHECK_NOTHROW(g.validate());
    g.k_ini = 0.1;
    CHECK_THROWS_AS(g.validate(), InvalidParameter);
    g.k_ini = 0.5;
    g.avail = TimeSeries(std::vector<double>{1, 0.5});
    CHECK_THROWS_AS(g.validate(), ValidationError);

    ScenarioConfig s;
    s.name = "x";
    s.decarbonize = true;
    s.chp_fixed_to_ref = true;
    CHECK_THROWS_AS(s.validate(), InvalidParameter);

    ContextConfig c{"c", 0.0, TimeSeries(std::vector<double>{1.0})};
    CHECK_THROWS_AS(c.validate(), InvalidParameter);

    CHECK(tech_from_string("CHP") == TechId::CHP);
    CHECK_THROWS_AS(tech_from_string("XYZ"), InvalidParameter);
    CHECK(heat_level_from_string(to_string(HeatLevelId::SPACE_75_55)) == HeatLevelId::SPACE_75_55);
    CHECK(hp_mode_policy_from_string(to_string(HpModePolicy::NoColdToHeat)) == HpModePolicy::NoColdToHeat);
}
