#include "doctest.h"

#include <cmath>
#include <set>

#include "flexopt/model_builder.hpp"
#include "flexopt/scenario_engine.hpp"
#include "flexopt/solver_backend.hpp"
#include "toys.hpp"

using namespace flexopt;

namespace {

const Constraint& row(const ModelInstance& m, const std::string& name) {
    for (const auto& c : m.constraints()) {
        if (c.name == name) return c;
    }
    FAIL("no row " << name);
    throw std::logic_error("unreachable");
}

bool has_row(const ModelInstance& m, const std::string& name) {
    for (const auto& c : m.constraints()) {
        if (c.name == name) return true;
    }
    return false;
}

double coef(const ModelInstance& m, const std::string& row_name, const VarKey& key) {
    const auto v = m.var(key);
    for (const auto& t : row(m, row_name).terms) {
        if (t.var == v) return t.coef;
    }
    return 0.0;
}

std::size_t count_symbol(const ModelInstance& m, const std::string& symbol) {
    std::size_t n = 0;
    for (std::size_t j = 0; j < m.num_variables(); ++j) n += m.key_of(j).symbol == symbol ? 1 : 0;
    return n;
}

const Dataset& week() {
    static const Dataset ds = generate_synthetic_dataset(1, 168);
    return ds;
}

ContextConfig base_context(const Dataset& ds) { return context_presets(ds.prices)[0]; }

TimeSeries zero_dispatch(std::size_t T) { return TimeSeries(std::vector<double>(T, 0.0)); }

struct Counts {
    std::size_t vars = 0, rows = 0, bins = 0;
};

// Block-sum formula of docs/model_blocks.md, evaluated from the catalog alone.
Counts formula_counts(const Dataset& ds, const ScenarioConfig& s, std::size_t T) {
    const auto& cat = ds.catalog;
    auto invest = [&](TechId id) {
        switch (id) {
            case TechId::BES:
            case TechId::TES:
            case TechId::H2S:
            case TechId::Elc:
            case TechId::FC: return s.allow_storage_invest;
            default: return s.allow_conversion_invest;
        }
    };
    auto has_capn = [&](TechId id) { return invest(id) && cat.at(id).cap_new_max > 0.0; };
    auto present = [&](TechId id) { return cat.at(id).cap_existing > 0.0 || has_capn(id); };

    Counts c;
    std::size_t buses = 5;  // ELEC, PROC, SPACE, COOL, SELL
    c.vars += 1 + 2 * T;    // grid
    c.rows += T;
    if (!s.decarbonize) {
        c.vars += T;
        ++buses;
    }
    bool h2 = false;
    for (TechId id : {TechId::CHP, TechId::HOB, TechId::P2H, TechId::Elc, TechId::FC}) {
        if (!present(id)) continue;
        if (s.decarbonize && (id == TechId::CHP || id == TechId::HOB)) continue;
        const std::size_t k = cat.at(id).efficiencies.size();
        const std::size_t n = has_capn(id) ? 1 : 0;
        c.vars += T * (1 + k) + n;
        c.rows += T * k + T * n;
        h2 = h2 || id == TechId::Elc || id == TechId::FC;
    }
    {
        const auto modes = enumerate_hp_modes(ds.heat_pump);
        std::size_t m = 0;
        for (const auto& md : modes) {
            const bool cool_src = md.source == "COOL_7_12";
            if (s.hp_modes == HpModePolicy::CoolingOnly && !(cool_src && md.sink == "WELL")) continue;
            if (s.hp_modes == HpModePolicy::NoColdToHeat && cool_src && md.sink == "SPACE_75_55") continue;
            ++m;
        }
        const std::size_t n = s.reference_cooling_machine ? 0 : (has_capn(TechId::HP) ? 1 : 0);
        c.vars += 2 * m * T + n;
        c.rows += m * T + 2 * T;
        c.bins += m * T;
    }
    for (TechId id : {TechId::PV, TechId::WT}) {
        if (!present(id)) continue;
        c.vars += 2 * T + (has_capn(id) ? 1 : 0);
        c.rows += T;
    }
    auto storage = [&](TechId id) {
        const auto& p = cat.at(id);
        const std::size_t n = has_capn(id) ? 1 : 0;
        c.vars += 3 * T + n;
        c.rows += T + 1 + T * n;
        if (std::isfinite(p.c_rate_in)) c.rows += T;
        if (std::isfinite(p.c_rate_out)) c.rows += T;
    };
    if (present(TechId::BES)) storage(TechId::BES);
    if (present(TechId::TES)) {
        for (int i = 0; i < 3; ++i) storage(TechId::TES);
    }
    if (present(TechId::H2S)) {
        storage(TechId::H2S);
        h2 = true;
    }
    for (std::size_t g = 0; g < ds.bev_groups.size(); ++g) {
        c.vars += (s.z_v2x ? 3 : 2) * T;
        c.rows += T + 1;
    }
    if (h2) ++buses;
    c.vars += T;  // downgrading
    c.rows += buses * T;
    c.vars += 6;
    c.rows += 5 + (s.decarbonize ? 1 : 0);
    if (s.chp_fixed_to_ref) c.rows += T;
    return c;
}

}  // namespace

TEST_CASE("empty system") {
    const Dataset ds = toys::empty_dataset({30.0, 60.0});
    auto [m, report] = build_model(ds, toys::plain_scenario(), toys::context_for(ds));
    CHECK(m.num_binaries() == 0);
    CHECK(count_symbol(m, "P_out") == 0);
    CHECK(count_symbol(m, "P_buy") == 2);
    const SolveResult r = solve(m);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(std::abs(r.objective) <= 1e-9);
}

TEST_CASE("block counts follow the published formula") {
    const Dataset ds = generate_synthetic_dataset(1, 24);
    for (const auto& s : scenario_presets()) {
        CAPTURE(s.name);
        BuildOptions bo;
        if (s.chp_fixed_to_ref) bo.ref_chp_dispatch = zero_dispatch(24);
        auto [m, report] = build_model(ds, s, base_context(ds), bo);
        const Counts f = formula_counts(ds, s, 24);
        CHECK(report.num_variables == f.vars);
        CHECK(report.num_constraints == f.rows);
        CHECK(report.num_binaries == f.bins);
        CHECK(report.num_variables == m.num_variables());
        CHECK(report.num_constraints == m.num_constraints());
        std::size_t vsum = 0, csum = 0;
        for (const auto& [b, n] : report.variables_by_block) vsum += n;
        for (const auto& [b, n] : report.constraints_by_block) csum += n;
        CHECK(vsum == m.num_variables());
        CHECK(csum == m.num_constraints());
    }
}

TEST_CASE("net-zero cells have no natural gas") {
    const auto& ds = week();
    auto [m, report] = build_model(ds, scenario_preset("fullFlex_d"), base_context(ds));
    CHECK(count_symbol(m, "P_ng") == 0);
    CHECK(m.select("P_in", "CHP").empty());
    CHECK(m.select("P_in", "HOB").empty());
    std::size_t net_zero = 0;
    for (const auto& c : m.constraints()) net_zero += c.name == "net_zero" ? 1 : 0;
    CHECK(net_zero == 1);
    CHECK(report.decarbonize);

    auto [plain, r2] = build_model(ds, scenario_preset("someFlex"), base_context(ds));
    CHECK(count_symbol(plain, "P_ng") == ds.horizon());
    CHECK(!has_row(plain, "net_zero"));

    ModelBuilder b(ds, scenario_preset("noFlex_d"), base_context(ds));
    CHECK_THROWS_AS(b.add_ng_block(), ContractViolation);
}

TEST_CASE("grid tariff") {
    const auto& ds = week();
    const auto ctx = base_context(ds);
    auto [m, report] = build_model(ds, scenario_preset("someFlex"), ctx);
    const double e = report.annual_weight * ds.dt_hours() * 1e-3;
    const auto peak = m.var({"P_peak", "EG", "", -1});
    CHECK(m.variables()[peak].upper == 20'000.0);
    CHECK(coef(m, "opex_def", {"P_peak", "EG", "", -1}) == doctest::Approx(-70.0));
    for (int t : {0, 17, 100}) {
        CHECK(coef(m, "opex_def", {"P_buy", "EG", "", t}) == doctest::Approx(-e * (ctx.price_series[t] + 62.28)));
        CHECK(coef(m, "opex_def", {"P_sell", "EG", "", t}) == doctest::Approx(e * ctx.price_series[t]));
        CHECK(coef(m, "ce_def", {"P_buy", "EG", "", t}) == doctest::Approx(-e * ds.cefs[t]));
        CHECK(coef(m, "peak[" + std::to_string(t) + "]", {"P_buy", "EG", "", t}) == 1.0);
    }
    CHECK(report.annual_weight == doctest::Approx(8760.0 / 168.0));
}

TEST_CASE("natural gas prices and emissions") {
    const auto& ds = week();
    auto [m, report] = build_model(ds, scenario_preset("someFlex"), base_context(ds));
    const double e = report.annual_weight * 1e-3;
    // 1 MWh of gas: 43 EUR + 55 EUR/t * 0.240 t = 43 + 13.20
    CHECK(-coef(m, "opex_def", {"P_ng", "NG", "", 3}) / e == doctest::Approx(43.0 + 13.20));
    CHECK(-coef(m, "ce_def", {"P_ng", "NG", "", 3}) / e == doctest::Approx(0.240));
    CHECK(55.0 * 0.240 == doctest::Approx(13.20));
}

TEST_CASE("conversion efficiencies") {
    const auto& ds = week();
    auto [m, report] = build_model(ds, scenario_preset("fullFlex"), base_context(ds));
    CHECK(coef(m, "HOB_heat[5]", {"P_in", "HOB", "ng", 5}) == -0.9);
    CHECK(coef(m, "CHP_el[5]", {"P_in", "CHP", "ng", 5}) == -0.40);
    CHECK(coef(m, "CHP_heat[5]", {"P_in", "CHP", "ng", 5}) == -0.45);
    CHECK(coef(m, "FC_el[5]", {"P_in", "FC", "h2", 5}) == -0.50);
    CHECK(coef(m, "FC_heat[5]", {"P_in", "FC", "h2", 5}) == -0.34);
    CHECK(coef(m, "SPACE_75_55[5]", {"P_out", "FC", "heat", 5}) == 1.0);
    CHECK(coef(m, "PROC_95_75[5]", {"P_out", "P2H", "heat", 5}) == 1.0);
    CHECK(coef(m, "PROC_95_75[5]", {"Q_hd", "HD", "", 5}) == -1.0);
    CHECK(coef(m, "SPACE_75_55[5]", {"Q_hd", "HD", "", 5}) == 1.0);

    // PV is not a converter
    ModelBuilder b(ds, scenario_preset("REF"), base_context(ds));
    b.add_grid_block();
    CHECK_THROWS_AS(b.add_conversion_block(ds.catalog.at(TechId::PV)), InvalidParameter);
}

TEST_CASE("zero-capacity conversion outputs are fixed") {
    Dataset ds = toys::empty_dataset({10.0, 20.0});
    ModelBuilder b(ds, toys::plain_scenario(), toys::context_for(ds));
    b.add_grid_block();
    TechParams p2h = ds.catalog.at(TechId::P2H);
    b.add_conversion_block(p2h);
    auto [m, report] = b.finish();
    for (int t : {0, 1}) CHECK(m.variables()[m.var({"P_out", "P2H", "heat", t})].upper == 0.0);
}

TEST_CASE("heat pump modes by scenario") {
    const auto& ds = week();
    auto modes_of = [&](const char* name) {
        BuildOptions bo;
        if (scenario_preset(name).chp_fixed_to_ref) bo.ref_chp_dispatch = zero_dispatch(ds.horizon());
        return build_model(ds, scenario_preset(name), base_context(ds), bo).second.hp_modes;
    };
    const auto ref = modes_of("REF");
    REQUIRE(ref.size() == 1);
    CHECK(ref[0].source == "COOL_7_12");
    CHECK(ref[0].sink == "WELL");
    const auto noflex = modes_of("noFlex");
    CHECK(noflex.size() == 2);
    for (const auto& m : noflex) CHECK(!(m.source == "COOL_7_12" && m.sink == "SPACE_75_55"));
    CHECK(modes_of("someFlex").size() == 3);

    auto [m, report] = build_model(ds, scenario_preset("someFlex"), base_context(ds));
    const auto& modes_row = row(m, "HP_modes[7]");
    CHECK(modes_row.rhs == ds.heat_pump.n_modes);
    CHECK(modes_row.terms.size() == 3);
    CHECK(modes_row.sense == Sense::LessEqual);

    // REF heat pump is the existing cooling machine
    auto [mr, rr] = build_model(ds, scenario_preset("REF"), base_context(ds));
    CHECK(row(mr, "HP_cap[0]").rhs == 1147.0);
    CHECK(count_symbol(mr, "P_capn") == 0);
}

TEST_CASE("heat pump with one admissible mode per hour") {
    const Dataset one = toys::hp_modes_dataset(1);
    auto [m1, r1] = build_model(one, toys::plain_scenario(), toys::context_for(one));
    const SolveResult s1 = solve(m1);
    REQUIRE(s1.status == SolveStatus::Optimal);
    for (int t : {0, 1}) {
        int active = 0;
        for (const auto& [key, j] : m1.select("Q_hp", "HP")) {
            if (key.t == t && s1.values[j] > 1e-6) ++active;
        }
        CHECK(active <= 1);
    }
    CHECK(std::abs(s1.objective - toys::hp_mode_enumeration(m1, 1)) <= 1e-6 * std::max(1.0, std::abs(s1.objective)));

    const Dataset two = toys::hp_modes_dataset(2);
    auto [m2, r2] = build_model(two, toys::plain_scenario(), toys::context_for(two));
    const SolveResult s2 = solve(m2);
    REQUIRE(s2.status == SolveStatus::Optimal);
    CHECK(s2.objective <= s1.objective + 1e-6);
}

TEST_CASE("renewables") {
    const auto& ds = week();
    auto [m, report] = build_model(ds, scenario_preset("someFlex"), base_context(ds));
    const auto capn = m.var({"P_capn", "PV", "", -1});
    CHECK(m.variables()[capn].upper == 2770.0);
    const auto& gen = row(m, "PV_gen[12]");
    CHECK(gen.rhs == doctest::Approx(307.0 * ds.pv_profile[12]));
    const double e = report.annual_weight * 1e-3;
    CHECK(-coef(m, "opex_def", {"P_oc", "WT", "", 4}) / e == doctest::Approx(62.28));
    CHECK(coef(m, "opex_def", {"P_oc", "PV", "", 4}) == 0.0);
    CHECK(coef(m, "ce_def", {"P_fi", "PV", "", 4}) == 0.0);

    // night hour
    const auto& night = row(m, "PV_gen[0]");
    CHECK(ds.pv_profile[0] == 0.0);
    CHECK(night.rhs == 0.0);
}

TEST_CASE("storage recursion") {
    CHECK(default_catalog().at(TechId::BES).eta_cycle == 0.95);
    CHECK(default_catalog().at(TechId::BES).eta_time == 0.99998);

    Dataset ds = toys::empty_dataset({10.0, 50.0});
    ds.edem = TimeSeries(std::vector<double>{0.0, 5.0});
    auto& bes = ds.catalog.techs.at(TechId::BES);
    bes.cap_existing = 10.0;
    bes.eta_cycle = 1.0;
    bes.eta_time = 1.0;
    bes.k_ini = 0.0;
    auto [m, report] = build_model(ds, toys::plain_scenario(), toys::context_for(ds));
    const SolveResult r = solve(m);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.value(m, {"P_in", "BES", "", 0}) == doctest::Approx(5.0));
    CHECK(r.value(m, {"P_out", "BES", "", 1}) == doctest::Approx(5.0));
    CHECK(r.value(m, {"E", "BES", "", 1}) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(r.value(m, {"P_buy", "EG", "", 1}) == doctest::Approx(0.0).epsilon(1e-9));

    // Cycle efficiency is split evenly on charge and discharge.
    const auto& week_ds = week();
    auto [mf, rf] = build_model(week_ds, scenario_preset("fullFlex"), base_context(week_ds));
    const double eta = std::sqrt(0.95);
    CHECK(coef(mf, "BES_soc[3]", {"P_in", "BES", "", 3}) == doctest::Approx(-eta));
    CHECK(coef(mf, "BES_soc[3]", {"P_out", "BES", "", 3}) == doctest::Approx(1.0 / eta));
    CHECK(coef(mf, "BES_soc[3]", {"E", "BES", "", 2}) == doctest::Approx(-0.99998));

    // Without capacity the storage cannot move energy.
    Dataset none = toys::empty_dataset({10.0, 50.0});
    ModelBuilder b(none, toys::plain_scenario(), toys::context_for(none));
    b.add_grid_block();
    b.add_storage_block(TechId::BES);
    auto [mz, rz] = b.finish();
    CHECK(mz.variables()[mz.var({"E", "BES", "", 0})].upper == 0.0);
    const SolveResult z = solve(mz);
    REQUIRE(z.status == SolveStatus::Optimal);
    CHECK(std::abs(z.value(mz, {"P_out", "BES", "", 0})) <= 1e-9);
}

TEST_CASE("BEV fleet") {
    const auto& ds = week();
    for (const auto& g : ds.bev_groups) {
        CHECK(g.k_empty == 0.15);
        CHECK(g.k_full == 0.85);
        CHECK(g.lambda_in == 0.7);
        CHECK(g.e_cap == doctest::Approx(973.2));
    }
    auto [smart, rs] = build_model(ds, scenario_preset("someFlex"), base_context(ds));
    CHECK(row(smart, "penalty_def").terms.size() == 1);
    CHECK(count_symbol(smart, "P_v2x") == 2 * ds.horizon());

    BuildOptions bo;
    bo.ref_chp_dispatch = zero_dispatch(ds.horizon());
    auto [conv, rc] = build_model(ds, scenario_preset("noFlex"), base_context(ds), bo);
    CHECK(row(conv, "penalty_def").terms.size() == 1 + 2 * ds.horizon());
    CHECK(-coef(conv, "penalty_def", {"P_in", "BEV_early_shift", "", 9}) == 10.0 * kPenaltyPerKw);
    CHECK(count_symbol(conv, "P_v2x") == 0);
}

TEST_CASE("conventional charging happens as early as possible") {
    const Dataset ds = toys::bev_recharge_dataset();
    for (bool smart : {false, true}) {
        CAPTURE(smart);
        ScenarioConfig s = toys::plain_scenario();
        s.z_smart = smart;
        auto [m, report] = build_model(ds, s, toys::context_for(ds));
        const SolveResult r = solve(m);
        REQUIRE(r.status == SolveStatus::Optimal);
        const auto oracle = toys::bev_recharge_enumeration(ds, smart);
        CHECK(std::abs(r.objective - oracle.objective) <= 1e-6 * std::max(1.0, oracle.objective));
        CHECK(r.value(m, {"P_in", "BEV_fleet", "", 1}) == doctest::Approx(oracle.charge_hour1).epsilon(1e-9));
        CHECK(r.value(m, {"P_in", "BEV_fleet", "", 1}) == doctest::Approx(smart ? 0.0 : 30.0));
    }
}

TEST_CASE("BEV drive beyond the battery window is rejected at build time") {
    Dataset ds = toys::bev_recharge_dataset();
    ds.bev_groups[0].drive = TimeSeries(std::vector<double>{60.0, 0.0, 0.0});
    try {
        build_model(ds, toys::plain_scenario(), toys::context_for(ds));
        FAIL("expected a build error");
    } catch (const BuildError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("BEV group fleet") != std::string::npos);
        CHECK(msg.find("hours 0-0") != std::string::npos);
    }
}

TEST_CASE("emissions and direct air capture") {
    const auto& ds = week();
    for (const auto& ctx : context_presets(ds.prices)) {
        auto [m, report] = build_model(ds, scenario_preset("someFlex_d"), ctx);
        CHECK(-coef(m, "opex_def", {"CE_dac", "", "", -1}) == ctx.c_dac);
        CHECK(coef(m, "ce_def", {"CE_dac", "", "", -1}) == 1.0);
    }
    CHECK(context_presets(ds.prices)[0].c_dac == 222.0);
    CHECK(context_presets(ds.prices)[1].c_dac == 10'000.0);

    const Dataset empty = toys::empty_dataset({10.0, 20.0});
    auto [m, report] = build_model(empty, toys::plain_scenario(), toys::context_for(empty));
    const SolveResult r = solve(m);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(std::abs(r.value(m, {"CE_dac", "", "", -1})) <= 1e-9);
}

TEST_CASE("CHP pinned to the reference dispatch") {
    const auto& ds = week();
    const auto ctx = base_context(ds);
    const std::size_t T = ds.horizon();
    CHECK_THROWS_AS(build_model(ds, scenario_preset("noFlex"), ctx), BuildError);

    BuildOptions bo;
    bo.ref_chp_dispatch = zero_dispatch(T);
    auto [m, report] = build_model(ds, scenario_preset("noFlex"), ctx, bo);
    for (std::size_t t = 0; t < T; ++t) {
        const auto& r = row(m, "chp_fix[" + std::to_string(t) + "]");
        CHECK(r.rhs == 0.0);
        CHECK(r.sense == Sense::Equal);
    }

    std::vector<double> d(T, 0.0);
    d[5] = 100.0;
    auto [m2, r2] = build_model(ds, scenario_preset("someFlex"), ctx);
    fix_chp_to_reference(m2, TimeSeries(d));
    const auto& fixed = row(m2, "chp_fix[5]");
    CHECK(fixed.rhs == 100.0);
    REQUIRE(fixed.terms.size() == 1);
    CHECK(fixed.terms[0].var == m2.var({"P_out", "CHP", "el", 5}));
    CHECK_THROWS_AS(fix_chp_to_reference(m2, zero_dispatch(T - 1)), BuildError);
}

TEST_CASE("dispatch is invariant under price scaling") {
    Dataset ds = toys::bes_arbitrage_dataset();
    auto [m, report] = build_model(ds, toys::plain_scenario(), toys::context_for(ds));
    const SolveResult r = solve(m);
    REQUIRE(r.status == SolveStatus::Optimal);
    const double kappa = 3.7;
    std::vector<double> p = ds.prices.values();
    for (auto& x : p) x *= kappa;
    ds.prices = TimeSeries(p);
    auto [mk, rk] = build_model(ds, toys::plain_scenario(), toys::context_for(ds));
    const SolveResult k = solve(mk);
    REQUIRE(k.status == SolveStatus::Optimal);
    CHECK(k.objective == doctest::Approx(kappa * r.objective).epsilon(1e-9));
    for (const auto& [key, j] : m.select("E", "BES")) {
        CHECK(k.values[mk.var(key)] == doctest::Approx(r.values[j]).epsilon(1e-9));
    }
}

TEST_CASE("every objective variable is constrained") {
    const auto& ds = week();
    auto [m, report] = build_model(ds, scenario_preset("fullFlex"), base_context(ds));
    std::set<std::size_t> used;
    for (const auto& c : m.constraints()) {
        for (const auto& t : c.terms) used.insert(t.var);
    }
    for (std::size_t j = 0; j < m.num_variables(); ++j) {
        if (m.objective()[j] == 0.0) continue;
        const auto& v = m.variables()[j];
        CHECK((used.contains(j) || std::isfinite(v.lower) || std::isfinite(v.upper)));
    }
}
