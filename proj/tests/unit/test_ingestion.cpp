#include "doctest.h"

#include <cmath>
#include <sstream>

#include "flexopt/ingestion.hpp"
#include "tempdir.hpp"

using namespace flexopt;
using testing_support::TempDir;
using testing_support::write_file;

namespace {

std::string csv(std::size_t n, double base = 40.0) {
    std::ostringstream os;
    os << "t,value\n";
    for (std::size_t t = 0; t < n; ++t) os << t << "," << base + static_cast<double>(t % 24) << "\n";
    return os.str();
}

TimeSeries ts(std::vector<double> v) { return TimeSeries(std::move(v)); }

}  // namespace

TEST_CASE("load time series") {
    TempDir dir;
    write_file(dir / "year.csv", csv(8760));
    const TimeSeries year = load_timeseries(dir / "year.csv");
    CHECK(year.size() == 8760);
    CHECK(year[25] == 41.0);

    CHECK_THROWS_AS(load_timeseries(dir / "year.csv", {"value", 168, 1.0}), ValidationError);
    write_file(dir / "week.csv", csv(168));
    try {
        load_timeseries(dir / "week.csv", {"value", 8760, 1.0});
        FAIL("expected a horizon mismatch");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("horizon mismatch") != std::string::npos);
    }

    write_file(dir / "blank.csv", "t,value\n0,1.5\n1,\n2,3\n");
    try {
        load_timeseries(dir / "blank.csv");
        FAIL("expected a missing-value error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("missing value at row 1") != std::string::npos);
    }

    write_file(dir / "text.csv", "t,value\n0,1.5\n1,abc\n");
    CHECK_THROWS_AS(load_timeseries(dir / "text.csv"), ValidationError);
    write_file(dir / "dup.csv", "t,value\n0,1\n0,2\n");
    CHECK_THROWS_AS(load_timeseries(dir / "dup.csv"), ValidationError);
    write_file(dir / "nan.csv", "t,value\n0,nan\n");
    CHECK_THROWS_AS(load_timeseries(dir / "nan.csv"), ValidationError);
    CHECK_THROWS_AS(load_timeseries(dir / "absent.csv"), IoError);

    // Rows may come in any order; the index decides the position.
    write_file(dir / "shuffled.csv", "t,value\n1,20\n0,10\n");
    CHECK(load_timeseries(dir / "shuffled.csv").values() == std::vector<double>{10, 20});
}

TEST_CASE("write and reload a series") {
    TempDir dir;
    const TimeSeries s(std::vector<double>{0.1, 1.0 / 3.0, -2.5e-7, 123456.789012345});
    write_timeseries(dir / "s.csv", s);
    const TimeSeries back = load_timeseries(dir / "s.csv");
    REQUIRE(back.size() == s.size());
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(std::abs(back[i] - s[i]) <= 1e-12 * std::max(1.0, std::abs(s[i])));
}

TEST_CASE("inflexible demand") {
    auto zero = ts({0, 0, 0});
    auto r = derive_inflexible_demand(zero, zero, zero, zero);
    CHECK(r.demand.values() == std::vector<double>{0, 0, 0});
    CHECK(r.clamped == 0);

    r = derive_inflexible_demand(ts({100}), ts({20}), ts({10}), ts({30}));
    CHECK(r.demand[0] == 80.0);
    CHECK(r.clamped == 0);

    r = derive_inflexible_demand(ts({10}), ts({0}), ts({20}), ts({0}));
    CHECK(r.demand[0] == 0.0);
    CHECK(r.clamped == 1);

    CHECK_THROWS_AS(derive_inflexible_demand(ts({1, 2}), ts({1}), ts({1}), ts({1})), ValidationError);
}

TEST_CASE("BEV fleet aggregation") {
    std::map<std::string, TimeSeries> patterns{{"a", ts({1, 0, 1})}, {"b", ts({0, 1, 1})}};
    std::vector<BevBattery> twelve(12, BevBattery{81.1, "a", ts({0, 2, 0})});
    auto groups = aggregate_bev_fleet(twelve, patterns);
    REQUIRE(groups.size() == 1);
    CHECK(groups[0].e_cap == doctest::Approx(973.2).epsilon(1e-12));
    CHECK(groups[0].drive[1] == doctest::Approx(24.0));

    groups = aggregate_bev_fleet({BevBattery{50.0, "b", ts({1, 0, 0})}}, patterns);
    REQUIRE(groups.size() == 1);
    CHECK(groups[0].e_cap == 50.0);
    CHECK(groups[0].avail == patterns.at("b"));
    CHECK(groups[0].drive == ts({1, 0, 0}));

    std::vector<BevBattery> mixed{{10.0, "a", ts({0, 1, 0})}, {10.0, "b", ts({2, 0, 0})}, {10.0, "a", ts({0, 3, 0})}};
    groups = aggregate_bev_fleet(mixed, patterns);
    REQUIRE(groups.size() == 2);
    CHECK(groups[0].e_cap == 20.0);
    CHECK(groups[1].e_cap == 10.0);
    double drive_in = 0, drive_out = 0, cap_out = 0;
    for (const auto& b : mixed) drive_in += b.drive.sum();
    for (const auto& g : groups) {
        drive_out += g.drive.sum();
        cap_out += g.e_cap;
    }
    CHECK(drive_out == drive_in);
    CHECK(cap_out == 30.0);

    CHECK_THROWS_AS(aggregate_bev_fleet({BevBattery{10.0, "zzz", ts({0, 0, 0})}}, patterns), ValidationError);
}

TEST_CASE("price scaling") {
    const Dataset ds = generate_synthetic_dataset(3, 168);
    const TimeSeries& p = ds.prices;

    const TimeSeries same = scale_prices(p, p.mean(), p.stddev());
    for (std::size_t t = 0; t < p.size(); ++t) CHECK(same[t] == doctest::Approx(p[t]).epsilon(1e-12));

    const TimeSeries s = scale_prices(p, 97.0, 70.0);
    CHECK(std::abs(s.mean() - 97.0) <= 1e-9 * 97.0);
    CHECK(std::abs(s.stddev() - 70.0) <= 1e-9 * 70.0);
    for (std::size_t a = 0; a < p.size(); ++a) {
        for (std::size_t b = a + 1; b < p.size(); b += 7) {
            if (p[a] < p[b]) CHECK(s[a] < s[b]);
        }
    }
    CHECK_THROWS_AS(scale_prices(ts({5, 5, 5}), 97, 70), InvalidParameter);
}

TEST_CASE("synthetic dataset") {
    const Dataset a = generate_synthetic_dataset(1, 168);
    const Dataset b = generate_synthetic_dataset(1, 168);
    CHECK(a.prices == b.prices);
    CHECK(a.cefs == b.cefs);
    CHECK(a.edem == b.edem);
    CHECK(a.pv_profile == b.pv_profile);
    CHECK(a.wt_profile == b.wt_profile);
    REQUIRE(a.bev_groups.size() == 2);
    CHECK(a.bev_groups[1].drive == b.bev_groups[1].drive);
    CHECK(a.heat_dem.size() == 3);
    CHECK_NOTHROW(a.validate());

    const Dataset other = generate_synthetic_dataset(2, 168);
    CHECK(!(other.prices == a.prices));

    for (std::size_t t = 0; t < a.horizon(); ++t) {
        const int h = static_cast<int>(t % 24);
        if (h < kPvNightEnd || h >= kPvNightStart) CHECK(a.pv_profile[t] == 0.0);
    }
    const SynthParams params;
    CHECK(std::abs(a.prices.mean() - params.price_mean) <= 0.01 * params.price_mean);
    const Dataset year = generate_synthetic_dataset(5, 8760);
    CHECK(std::abs(year.prices.mean() - params.price_mean) <= 0.01 * params.price_mean);

    CHECK_THROWS_AS(generate_synthetic_dataset(1, 23), InvalidParameter);
    CHECK_THROWS_AS(generate_synthetic_dataset(1, 8761), InvalidParameter);
}

TEST_CASE("bundle round trip") {
    TempDir dir;
    const Dataset a = generate_synthetic_dataset(11, 48);
    save_bundle(a, dir.path());
    const Dataset b = load_bundle(dir.path());
    auto close = [](const TimeSeries& x, const TimeSeries& y) {
        if (x.size() != y.size()) return false;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (std::abs(x[i] - y[i]) > 1e-12 * std::max(1.0, std::abs(x[i]))) return false;
        }
        return true;
    };
    CHECK(close(a.prices, b.prices));
    CHECK(close(a.cefs, b.cefs));
    CHECK(close(a.edem, b.edem));
    CHECK(close(a.pv_profile, b.pv_profile));
    CHECK(close(a.wt_profile, b.wt_profile));
    for (const auto& [id, s] : a.heat_dem) CHECK(close(s, b.heat_dem.at(id)));
    REQUIRE(b.bev_groups.size() == a.bev_groups.size());
    for (std::size_t i = 0; i < a.bev_groups.size(); ++i) {
        CHECK(b.bev_groups[i].group_id == a.bev_groups[i].group_id);
        CHECK(b.bev_groups[i].e_cap == a.bev_groups[i].e_cap);
        CHECK(close(a.bev_groups[i].avail, b.bev_groups[i].avail));
        CHECK(close(a.bev_groups[i].drive, b.bev_groups[i].drive));
    }
    CHECK(b.catalog.techs.size() == a.catalog.techs.size());
    CHECK(b.catalog.at(TechId::PV).cap_existing == 307.0);
    CHECK(b.catalog.at(TechId::PV).cap_new_max == 2770.0);
    CHECK(b.catalog.reference_cooling_machine_kw == a.catalog.reference_cooling_machine_kw);
    CHECK(b.grid.c_addon == 62.28);
    CHECK(b.heat_pump.n_modes == a.heat_pump.n_modes);
    CHECK_THROWS_AS(load_bundle(dir / "missing"), IoError);
}

TEST_CASE("synth params file") {
    TempDir dir;
    SynthParams p;
    p.price_mean = 55.0;
    p.bev_batteries_per_group = 3;
    p.to_json_file(dir / "p.json");
    const SynthParams q = SynthParams::from_json_file(dir / "p.json");
    CHECK(q.price_mean == 55.0);
    CHECK(q.bev_batteries_per_group == 3);
}
