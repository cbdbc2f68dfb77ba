#include "doctest.h"

#include <cmath>

#include "flexopt/scenario_engine.hpp"
#include "tempdir.hpp"

using namespace flexopt;

namespace {

const Dataset& day() {
    static const Dataset ds = generate_synthetic_dataset(11, 24);
    return ds;
}

}  // namespace

TEST_CASE("scenario presets") {
    const auto all = scenario_presets();
    REQUIRE(all.size() == 7);
    const char* names[] = {"REF", "noFlex", "someFlex", "fullFlex", "noFlex_d", "someFlex_d", "fullFlex_d"};
    for (std::size_t i = 0; i < 7; ++i) CHECK(all[i].name == names[i]);

    const auto ref = scenario_preset("REF");
    CHECK(!ref.allow_conversion_invest);
    CHECK(!ref.allow_storage_invest);
    CHECK(!ref.z_smart);
    CHECK(ref.reference_cooling_machine);
    CHECK(ref.hp_modes == HpModePolicy::CoolingOnly);

    const auto no = scenario_preset("noFlex");
    CHECK(no.allow_conversion_invest);
    CHECK(!no.use_existing_flex);
    CHECK(!no.allow_storage_invest);
    CHECK(!no.z_smart);
    CHECK(!no.z_v2x);
    CHECK(no.chp_fixed_to_ref);
    CHECK(no.hp_modes == HpModePolicy::NoColdToHeat);

    const auto some = scenario_preset("someFlex");
    CHECK(some.use_existing_flex);
    CHECK(some.z_smart);
    CHECK(some.z_v2x);
    CHECK(!some.allow_storage_invest);
    CHECK(!some.chp_fixed_to_ref);
    CHECK(some.hp_modes == HpModePolicy::All);

    const auto full = scenario_preset("fullFlex");
    CHECK(full.allow_storage_invest);
    CHECK(full.z_smart);

    for (const char* d : {"noFlex_d", "someFlex_d", "fullFlex_d"}) {
        const auto s = scenario_preset(d);
        CHECK(s.decarbonize);
        CHECK(!s.chp_fixed_to_ref);
        const auto plain = scenario_preset(std::string(d).substr(0, std::string(d).size() - 2));
        CHECK(s.allow_storage_invest == plain.allow_storage_invest);
        CHECK(s.z_smart == plain.z_smart);
        CHECK(s.hp_modes == plain.hp_modes);
    }
    CHECK_THROWS_AS(scenario_preset("halfFlex"), InvalidParameter);
}

TEST_CASE("context presets") {
    const auto& ds = generate_synthetic_dataset(2, 168);
    const auto ctx = context_presets(ds.prices);
    REQUIRE(ctx.size() == 3);
    CHECK(ctx[0].name == "c_base");
    CHECK(ctx[1].name == "c_strict");
    CHECK(ctx[2].name == "c_scaled");
    CHECK(ctx[0].c_dac == 222.0);
    CHECK(ctx[1].c_dac == 10'000.0);
    CHECK(ctx[2].c_dac == 222.0);
    CHECK(ctx[0].price_series == ds.prices);
    CHECK(ctx[1].price_series == ds.prices);
    CHECK(ctx[2].price_series.mean() == doctest::Approx(97.0).epsilon(1e-9));
    CHECK(ctx[2].price_series.stddev() == doctest::Approx(70.0).epsilon(1e-9));

    ContextPresetParams p;
    p.c_dac_strict = 500.0;
    CHECK(context_presets(ds.prices, p)[1].c_dac == 500.0);

    const auto sel = select_contexts({"c_scaled", "c_base"}, ds.prices);
    REQUIRE(sel.size() == 2);
    CHECK(sel[0].name == "c_base");
    CHECK(sel[1].name == "c_scaled");
    CHECK_THROWS_AS(select_contexts({"c_other"}, ds.prices), InvalidParameter);
    CHECK(select_scenarios({}).size() == 7);
    CHECK_THROWS_AS(select_scenarios({"nope"}), InvalidParameter);
}

TEST_CASE("two-scenario study") {
    const auto& ds = day();
    const auto study = run_study(ds, select_contexts({"c_base"}, ds.prices), select_scenarios({"REF", "noFlex"}));
    REQUIRE(study.cells.size() == 2);
    CHECK(study.all_solved());
    const auto* ref = study.find("c_base", "REF");
    const auto* no = study.find("c_base", "noFlex");
    REQUIRE(ref);
    REQUIRE(no);
    CHECK(no->annual.tac <= ref->annual.tac * (1.0 + 1e-9));
    CHECK(ref->ng_variables == ds.horizon());
    CHECK(study.find("c_base", "fullFlex") == nullptr);

    const auto pareto = pareto_points(study, "c_base");
    for (const auto& p : pareto) {
        if (p.scenario == "noFlex") {
            REQUIRE(p.tac_pct);
            CHECK(*p.tac_pct == doctest::Approx(0.0));
            CHECK(*p.ce_pct == doctest::Approx(0.0));
        }
    }
    CHECK(study.notes.empty());
}

TEST_CASE("pinned cells without REF in the selection") {
    const auto& ds = day();
    const auto study = run_study(ds, select_contexts({"c_base"}, ds.prices), select_scenarios({"noFlex"}));
    REQUIRE(study.cells.size() == 1);
    CHECK(study.cells[0].ok);
    CHECK(study.notes.size() == 1);
}

TEST_CASE("study is deterministic across job counts") {
    const auto& ds = day();
    const auto ctx = select_contexts({"c_base", "c_strict"}, ds.prices);
    const auto sc = select_scenarios({"REF", "noFlex", "someFlex", "someFlex_d"});
    StudyOptions one;
    StudyOptions two;
    two.jobs = 2;
    const auto a = run_study(ds, ctx, sc, one);
    const auto b = run_study(ds, ctx, sc, two);
    REQUIRE(a.cells.size() == b.cells.size());
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        CAPTURE(a.cells[i].scenario);
        CHECK(a.cells[i].context == b.cells[i].context);
        CHECK(a.cells[i].scenario == b.cells[i].scenario);
        CHECK(a.cells[i].solve.objective == b.cells[i].solve.objective);
    }
    CHECK(a.decarb.size() == b.decarb.size());
}

TEST_CASE("study inputs are validated") {
    const auto& ds = day();
    const auto ctx = select_contexts({"c_base"}, ds.prices);
    StudyOptions bad;
    bad.jobs = 0;
    CHECK_THROWS_AS(run_study(ds, ctx, select_scenarios({"REF"}), bad), InvalidParameter);
    auto twice = select_scenarios({"REF"});
    twice.push_back(twice[0]);
    CHECK_THROWS_AS(run_study(ds, ctx, twice), InvalidParameter);
}

TEST_CASE("study config file") {
    testing_support::TempDir dir;
    const auto p = dir.path() / "study.json";
    testing_support::write_file(p, R"({
        "synth_seed": 4, "horizon": 48,
        "contexts": ["c_base"], "scenarios": ["REF", "fullFlex"],
        "context_params": {"c_dac_strict": 900},
        "solve": {"mip_gap": 0.001, "threads": 2},
        "jobs": 3, "out": "res", "format": "csv-dir"
    })");
    StudyOptions defaults;
    defaults.solve.seed = 7;
    defaults.jobs = 1;
    const auto c = StudyConfig::from_json_file(p, defaults);
    CHECK(*c.synth_seed == 4);
    CHECK(*c.horizon == 48);
    CHECK(c.contexts == std::vector<std::string>{"c_base"});
    CHECK(c.scenarios.size() == 2);
    CHECK(c.context_params.c_dac_strict == 900.0);
    CHECK(c.options.solve.mip_gap == 0.001);
    CHECK(c.options.solve.threads == 2);
    CHECK(c.options.solve.seed == 7);
    CHECK(c.options.jobs == 3);
    CHECK(*c.out == dir.path() / "res");
    CHECK(*c.format == "csv-dir");
    CHECK(!c.dataset);

    testing_support::write_file(p, R"({"synth_seed": 1, "colour": "red"})");
    CHECK_THROWS_AS(StudyConfig::from_json_file(p), ValidationError);
    testing_support::write_file(p, R"({"synth_seed": 1, "dataset": "x"})");
    CHECK_THROWS_AS(StudyConfig::from_json_file(p), ValidationError);
    testing_support::write_file(p, "{not json");
    CHECK_THROWS_AS(StudyConfig::from_json_file(p), ValidationError);
    CHECK_THROWS_AS(StudyConfig::from_json_file(dir.path() / "missing.json"), IoError);
}
