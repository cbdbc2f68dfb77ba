#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "flexopt/model_builder.hpp"
#include "flexopt/scenario_engine.hpp"
#include "flexopt/solver_backend.hpp"
#include "tempdir.hpp"
#include "toys.hpp"

using namespace flexopt;

namespace {

ModelInstance lower_bound_model(double lb) {
    ModelInstance m;
    const auto x = m.add_variable({"x", "", "", -1}, 0.0, kInf);
    m.add_constraint("x_min", {{x, 1.0}}, Sense::GreaterEqual, lb);
    m.add_objective(x, 1.0);
    return m;
}

std::pair<ModelInstance, BuildReport> day_model(const char* scenario) {
    static const Dataset ds = generate_synthetic_dataset(3, 24);
    BuildOptions bo;
    if (scenario_preset(scenario).chp_fixed_to_ref) bo.ref_chp_dispatch = TimeSeries(std::vector<double>(24, 0.0));
    return build_model(ds, scenario_preset(scenario), context_presets(ds.prices)[0], bo);
}

}  // namespace

TEST_CASE("tiny programs") {
    const SolveResult r = solve(lower_bound_model(3.0));
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.objective == doctest::Approx(3.0));
    CHECK(r.values.size() == 1);
    CHECK(r.backend == "highs");

    ModelInstance empty;
    empty.add_objective_constant(12.5);
    const SolveResult e = solve(empty);
    REQUIRE(e.status == SolveStatus::Optimal);
    CHECK(e.objective == 12.5);

    ModelInstance inf;
    const auto x = inf.add_variable({"x", "", "", -1}, 0.0, kInf);
    inf.add_constraint("hi", {{x, 1.0}}, Sense::LessEqual, 1.0);
    inf.add_constraint("lo", {{x, 1.0}}, Sense::GreaterEqual, 2.0);
    inf.add_objective(x, 1.0);
    const SolveResult ri = solve(inf);
    CHECK(ri.status == SolveStatus::Infeasible);
    CHECK(!ri.has_values());

    ModelInstance unb;
    const auto y = unb.add_variable({"y", "", "", -1}, 0.0, kInf);
    const auto z = unb.add_variable({"z", "", "", -1}, 0.0, kInf);
    unb.add_constraint("link", {{y, 1.0}, {z, -1.0}}, Sense::GreaterEqual, 0.0);
    unb.add_objective(y, -1.0);
    CHECK(solve(unb).status == SolveStatus::Unbounded);
}

TEST_CASE("binary knapsack") {
    ModelInstance m;
    const double w[] = {5, 4, 3};
    const double v[] = {10, 40, 30};
    std::vector<Term> cap;
    for (int i = 0; i < 3; ++i) {
        const auto b = m.add_variable({"b", "", "", i}, 0.0, 1.0, VarType::Binary);
        cap.push_back({b, w[i]});
        m.add_objective(b, -v[i]);
    }
    m.add_constraint("cap", cap, Sense::LessEqual, 7.0);
    const SolveResult r = solve(m);
    REQUIRE(r.status == SolveStatus::Optimal);
    double best = 0.0;
    for (int mask = 0; mask < 8; ++mask) {
        double wt = 0, val = 0;
        for (int i = 0; i < 3; ++i) {
            if (mask & (1 << i)) {
                wt += w[i];
                val += v[i];
            }
        }
        if (wt <= 7.0) best = std::max(best, val);
    }
    CHECK(r.objective == doctest::Approx(-best));
}

TEST_CASE("storage toy matches enumeration") {
    const Dataset ds = toys::bes_arbitrage_dataset();
    auto [m, report] = build_model(ds, toys::plain_scenario(), toys::context_for(ds));
    const SolveResult r = solve(m);
    REQUIRE(r.status == SolveStatus::Optimal);
    const double oracle = toys::bes_arbitrage_enumeration(ds);
    CHECK(std::abs(r.objective - oracle) <= 1e-6 * std::max(1.0, std::abs(oracle)));
    CHECK(r.value(m, {"P_out", "BES", "", 1}) == doctest::Approx(1.0));
}

TEST_CASE("solver options") {
    SolveOptions o;
    o.mip_gap = -0.1;
    CHECK_THROWS_AS(o.validate(), InvalidParameter);
    o.mip_gap = 0.0;
    o.threads = 0;
    CHECK_THROWS_AS(o.validate(), InvalidParameter);
    o.threads = 1;
    o.time_limit_s = 0.0;
    CHECK_THROWS_AS(o.validate(), InvalidParameter);
}

TEST_CASE("backend registry") {
    CHECK_THROWS_AS(make_backend("nope"), SolverError);
    CHECK(make_backend("highs")->name() == "highs");
    const auto names = available_backends();
    CHECK(std::find(names.begin(), names.end(), "highs") != names.end());

    ::setenv("FLEXOPT_SOLVER", "nope", 1);
    CHECK_THROWS_AS(default_backend(), SolverError);
    CHECK_THROWS_AS(solve(lower_bound_model(1.0)), SolverError);
    ::setenv("FLEXOPT_SOLVER", "highs", 1);
    CHECK(default_backend()->name() == "highs");
    ::unsetenv("FLEXOPT_SOLVER");
    CHECK(default_backend()->name() == "highs");
}

TEST_CASE("mps names") {
    CHECK(mps_column_name(0) == "C0000001");
    CHECK(mps_row_name(41) == "R0000042");
    CHECK(mps_column_name(9'999'998) == "C9999999");
    CHECK_THROWS(mps_column_name(9'999'999));
}

TEST_CASE("mps round trip") {
    testing_support::TempDir dir;
    for (const char* name : {"REF", "fullFlex", "fullFlex_d"}) {
        CAPTURE(name);
        auto [m, report] = day_model(name);
        const auto path = dir.path() / (std::string(name) + ".mps");
        export_mps(m, path);
        const MpsSummary ref = read_mps_reference(path);
        const MpsSummary own = summarize(m);
        CHECK(ref.num_variables == m.num_variables());
        CHECK(ref.num_constraints == m.num_constraints());
        CHECK(ref.num_nonzeros == m.num_nonzeros());
        CHECK(ref.num_nonzeros == own.num_nonzeros);
        CHECK(ref.integrality == own.integrality);
        CHECK(ref.objective_offset == doctest::Approx(m.objective_constant()));
        std::size_t bins = 0;
        for (bool b : ref.integrality) bins += b ? 1 : 0;
        CHECK(bins == m.num_binaries());

        const std::string text = testing_support::read_file(path);
        const bool has_bins = m.num_binaries() > 0;
        CHECK((text.find("'INTORG'") != std::string::npos) == has_bins);
        CHECK((text.find("'INTEND'") != std::string::npos) == has_bins);
        CHECK(text.find(" N  OBJ") != std::string::npos);
        CHECK(text.rfind("ENDATA") != std::string::npos);
    }

    // A file written from the model solves to the same optimum.
    auto [m, report] = day_model("someFlex");
    const auto path = dir.path() / "someFlex.mps";
    export_mps(m, path);
    CHECK(read_mps_reference(path).num_variables == m.num_variables());
    CHECK_THROWS_AS(read_mps_reference(dir.path() / "missing.mps"), IoError);
}

TEST_CASE("verification of a returned solution") {
    auto [m, report] = day_model("someFlex");
    const SolveResult r = solve(m);
    REQUIRE(r.status == SolveStatus::Optimal);
    const ResidualReport ok = verify_solution(m, r);
    CHECK(ok.ok());
    CHECK(ok.violated_constraints.empty());
    CHECK(ok.max_constraint_violation <= 1e-6);
    CHECK(ok.objective_rel_error <= 1e-6);

    // Disturb one purchase: ELEC[5] no longer balances.
    SolveResult bad = r;
    const auto j = m.var({"P_buy", "EG", "", 5});
    bad.values[j] += 50.0;
    const ResidualReport br = verify_solution(m, bad);
    CHECK(!br.feasible);
    REQUIRE(!br.violated_constraints.empty());
    CHECK(std::find(br.violated_constraints.begin(), br.violated_constraints.end(), "ELEC[5]") !=
          br.violated_constraints.end());
    CHECK(br.max_constraint_violation >= 50.0 - 1e-9);

    SolveResult wrong_obj = r;
    wrong_obj.objective *= 1.01;
    const ResidualReport wo = verify_solution(m, wrong_obj);
    CHECK(wo.feasible);
    CHECK(!wo.objective_ok);

    SolveResult below = r;
    below.values[j] = -1.0;
    CHECK(verify_solution(m, below).max_bound_violation >= 1.0);
}

TEST_CASE("repeat solves are deterministic") {
    auto [m, report] = day_model("fullFlex");
    const SolveResult a = solve(m);
    const SolveResult b = solve(m);
    REQUIRE(a.status == SolveStatus::Optimal);
    const SolveComparison c = compare_solves(a, b);
    CHECK(c.same_status);
    CHECK(c.same_objective);
    CHECK(c.same_values);
    CHECK(!c.degenerate());

    SolveResult shifted = b;
    shifted.values[0] += 1.0;
    CHECK(compare_solves(a, shifted).degenerate());
}
