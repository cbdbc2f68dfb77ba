#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <sstream>

#include "flexopt/reporting.hpp"
#include "flexopt/scenario_engine.hpp"
#include "tempdir.hpp"
#include "toys.hpp"

using namespace flexopt;

namespace {

const Dataset& two_days() {
    static const Dataset ds = generate_synthetic_dataset(5, 48);
    return ds;
}

const StudyResult& small_study() {
    static const StudyResult s = [] {
        const auto& ds = two_days();
        return run_study(ds, select_contexts({"c_base"}, ds.prices),
                         select_scenarios({"REF", "noFlex", "fullFlex", "noFlex_d", "fullFlex_d"}));
    }();
    return s;
}

std::size_t count_lines(const std::filesystem::path& p) {
    std::istringstream in(testing_support::read_file(p));
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) n += line.empty() ? 0 : 1;
    return n;
}

}  // namespace

TEST_CASE("annual balances") {
    const auto& s = small_study();
    REQUIRE(s.all_solved());
    for (const auto& c : s.cells) {
        CAPTURE(c.scenario);
        const auto& a = c.annual;
        const double scale = std::max(1.0, std::abs(a.tac));
        CHECK(std::abs(a.tac - (a.capex + a.opex)) <= 1e-9 * scale);
        CHECK(std::abs(a.tac - (c.solve.objective - a.penalty)) <= 1e-6 * scale);
        CHECK(std::abs(a.ce_net - (a.ce_scope1 + a.ce_scope2 - a.ce_removed)) <= 1e-9 * std::max(1.0, a.ce_scope2));
        CHECK(a.peak_buy >= 0.0);
        CHECK(a.opex_eg_sell >= 0.0);
        CHECK(c.residuals.ok());
    }
    CHECK(s.find("c_base", "REF")->annual.capex == 0.0);
    CHECK(s.find("c_base", "REF")->annual.new_capacities.empty());
    CHECK(s.find("c_base", "noFlex")->annual.penalty > 0.0);
    CHECK(s.find("c_base", "fullFlex")->annual.penalty == 0.0);
    for (const char* d : {"noFlex_d", "fullFlex_d"}) {
        const auto& a = s.find("c_base", d)->annual;
        CHECK(std::abs(a.ce_net) <= 1e-6);
        CHECK(a.ce_scope1 == 0.0);
        CHECK(a.opex_ng == 0.0);
        CHECK(a.opex_dac == doctest::Approx(222.0 * a.ce_removed));
    }
}

TEST_CASE("annual balances reject infeasible values") {
    const auto& ds = two_days();
    const auto ctx = context_presets(ds.prices)[0];
    auto [m, report] = build_model(ds, scenario_preset("someFlex"), ctx);
    SolveResult r = solve(m);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK_NOTHROW(annual_balances(m, r, ds, ctx, report));
    r.values[m.var({"P_buy", "EG", "", 0})] += 100.0;
    CHECK_THROWS(annual_balances(m, r, ds, ctx, report));
}

TEST_CASE("flow table") {
    const auto& s = small_study();
    for (const auto& c : s.cells) {
        CAPTURE(c.scenario);
        const auto imb = c.flows.imbalances();
        const auto thr = c.flows.throughput();
        for (const auto& [node, v] : imb) {
            CAPTURE(node);
            CHECK(!is_boundary_node(node));
            CHECK(std::abs(v) <= 1e-6 * std::max(1.0, thr.at(node)));
        }
        for (const auto& f : c.flows.rows) CHECK(f.mwh > 0.0);
    }
    // Boiler: heat out is 0.9 of gas in.
    const auto& ref = s.find("c_base", "REF")->flows;
    double gas = 0.0, heat = 0.0;
    for (const auto& f : ref.rows) {
        if (f.from == "NG" && f.to == "HOB") gas = f.mwh;
        if (f.from == "HOB" && f.to != "AMBIENT") heat += f.mwh;
    }
    REQUIRE(gas > 0.0);
    CHECK(heat / gas == doctest::Approx(0.9));

    // REF has no new capacity, so techs without existing capacity have no flows.
    for (const auto& f : ref.rows) {
        for (const char* absent : {"WT", "BES", "H2S", "Elc", "FC", "P2H"}) {
            CHECK(f.from != absent);
            CHECK(f.to != absent);
        }
    }
    CHECK(is_boundary_node("EG"));
    CHECK(!is_boundary_node("ELEC"));
}

TEST_CASE("study JSON round trip") {
    const auto& s = small_study();
    const std::string text = study_to_json(s);
    const StudyResult back = study_from_json(text);
    CHECK(study_to_json(back) == text);
    CHECK(back.cells.size() == s.cells.size());
    CHECK(back.schema == kStudySchema);

    testing_support::TempDir dir;
    emit(s, ReportFormat::Json, dir.path() / "out" / "study.json");
    CHECK(study_to_json(load_study(dir.path() / "out" / "study.json")) == text);
    CHECK_THROWS_AS(load_study(dir.path() / "nope.json"), IoError);
    CHECK_THROWS(study_from_json("{\"schema\": \"other/9\"}"));
}

TEST_CASE("csv directory") {
    const auto& s = small_study();
    testing_support::TempDir dir;
    const auto out = dir.path() / "csv";
    emit(s, ReportFormat::CsvDir, out);
    for (const auto& name : csv_table_names()) CHECK(std::filesystem::exists(out / (name + ".csv")));
    std::size_t ok = 0;
    for (const auto& c : s.cells) ok += c.ok ? 1 : 0;
    CHECK(count_lines(out / "cells.csv") == 1 + s.cells.size());
    CHECK(count_lines(out / "metrics.csv") == 1 + ok * 11);
    CHECK(count_lines(out / "hourly.csv") > 1);
    CHECK(report_format_from_string("json") == ReportFormat::Json);
    CHECK(report_format_from_string("csv-dir") == ReportFormat::CsvDir);
    CHECK_THROWS_AS(report_format_from_string("xml"), InvalidParameter);
}
