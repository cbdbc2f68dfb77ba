// Acceptance suite on the bundled dataset: one PASS/FAIL line per criterion.
// Usage: acceptance [--write-goldens] [--jobs N]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "flexopt/metrics.hpp"
#include "flexopt/scenario_engine.hpp"
#include "toys.hpp"

using namespace flexopt;
using json = nlohmann::json;

namespace {

const char* kBundle = FLEXOPT_DATA_DIR "/bundle_seed1_168h";
const char* kGoldens = FLEXOPT_GOLDENS;

bool ge_rel(double a, double b, double rel) { return a - b >= -rel * std::max(1.0, std::max(std::abs(a), std::abs(b))); }
bool close_rel(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max(1.0, std::abs(b)); }

struct Check {
    std::vector<std::string> failures;
    void require(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }
    bool passed() const { return failures.empty(); }
};

void report(int id, const char* title, const Check& c) {
    std::cout << (c.passed() ? "PASS" : "FAIL") << " criterion " << id << ": " << title << '\n';
    for (std::size_t i = 0; i < c.failures.size() && i < 20; ++i) std::cout << "    " << c.failures[i] << '\n';
    std::cout.flush();
}

std::string cell_id(const CellResult& c) { return c.context + "/" + c.scenario; }

const char* kPlain[] = {"REF", "noFlex", "someFlex", "fullFlex"};
const char* kDecarb[] = {"noFlex_d", "someFlex_d", "fullFlex_d"};

Check nesting(const StudyResult& s, double seconds) {
    Check c;
    c.require(s.all_solved(), "not every cell solved");
    for (const auto& ctx : s.contexts) {
        auto chain = [&](const char* const* names, std::size_t n) {
            for (std::size_t i = 0; i + 1 < n; ++i) {
                const auto* a = s.find(ctx, names[i]);
                const auto* b = s.find(ctx, names[i + 1]);
                if (!a || !b || !a->ok || !b->ok) {
                    c.require(false, ctx + ": missing " + names[i] + " or " + names[i + 1]);
                    continue;
                }
                std::ostringstream m;
                m << ctx << ": TAC(" << names[i] << ")=" << a->annual.tac << " < TAC(" << names[i + 1]
                  << ")=" << b->annual.tac;
                c.require(ge_rel(a->annual.tac, b->annual.tac, 1e-6), m.str());
            }
        };
        chain(kPlain, 4);
        chain(kDecarb, 3);
    }
    c.require(s.cells.size() == 21, "study does not have 21 cells");
    c.require(seconds < 15 * 60, "study took " + std::to_string(seconds) + " s");
    return c;
}

Check decarb_sign(const StudyResult& s) {
    Check c;
    c.require(s.decarb.size() == 3 * s.contexts.size(), "missing decarbonisation records");
    for (const auto& d : s.decarb) {
        std::ostringstream m;
        m << d.context << "/" << d.flex_level << ": cost " << d.cost;
        c.require(d.cost >= -1e-6 * std::max(1.0, std::abs(d.tac_plain)), m.str());
    }
    return c;
}

Check decarb_feasibility(const StudyResult& s) {
    Check c;
    std::size_t seen = 0;
    for (const auto& cell : s.cells) {
        if (!cell.scenario.ends_with("_d")) continue;
        ++seen;
        c.require(cell.ok, cell_id(cell) + " did not solve");
        c.require(cell.ng_variables == 0, cell_id(cell) + " has natural-gas variables");
        c.require(std::abs(cell.annual.ce_net) <= 1e-6,
                  cell_id(cell) + " net emissions " + std::to_string(cell.annual.ce_net));
    }
    c.require(seen == 9, "expected 9 net-zero cells");
    return c;
}

Check toy_oracles() {
    Check c;
    {
        const Dataset ds = toys::bes_arbitrage_dataset();
        auto [m, report] = build_model(ds, toys::plain_scenario(), toys::context_for(ds));
        const SolveResult r = solve(m);
        const double oracle = toys::bes_arbitrage_enumeration(ds);
        c.require(r.status == SolveStatus::Optimal, "BES toy not optimal");
        std::ostringstream msg;
        msg << "BES toy MILP " << r.objective << " vs enumeration " << oracle;
        c.require(std::abs(r.objective - oracle) <= 1e-6, msg.str());
    }
    {
        const Dataset ds = toys::bev_recharge_dataset();
        double charge[2] = {0, 0};
        for (int smart = 0; smart < 2; ++smart) {
            ScenarioConfig s = toys::plain_scenario();
            s.z_smart = smart == 1;
            auto [m, report] = build_model(ds, s, toys::context_for(ds));
            const SolveResult r = solve(m);
            const auto oracle = toys::bev_recharge_enumeration(ds, s.z_smart);
            c.require(r.status == SolveStatus::Optimal, "BEV toy not optimal");
            std::ostringstream msg;
            msg << "BEV toy (smart=" << smart << ") MILP " << r.objective << " vs enumeration " << oracle.objective;
            c.require(std::abs(r.objective - oracle.objective) <= 1e-6 * std::max(1.0, oracle.objective), msg.str());
            charge[smart] = r.value(m, {"P_in", "BEV_fleet", "", 1});
            c.require(std::abs(charge[smart] - oracle.charge_hour1) <= 1e-6, "BEV toy dispatch differs from enumeration");
        }
        c.require(charge[0] > charge[1] + 1.0, "conventional charging is not earlier than smart charging");
    }
    {
        for (int n : {1, 2}) {
            const Dataset ds = toys::hp_modes_dataset(n);
            auto [m, report] = build_model(ds, toys::plain_scenario(), toys::context_for(ds));
            const SolveResult r = solve(m);
            c.require(r.status == SolveStatus::Optimal, "HP toy not optimal");
            const double oracle = toys::hp_mode_enumeration(m, n);
            std::ostringstream msg;
            msg << "HP toy (n_modes=" << n << ") MILP " << r.objective << " vs enumeration " << oracle;
            c.require(std::abs(r.objective - oracle) <= 1e-6 * std::max(1.0, std::abs(oracle)), msg.str());
            for (int t = 0; t < static_cast<int>(ds.horizon()); ++t) {
                int active = 0;
                for (const auto& [key, j] : m.select("Y_hp", "HP")) {
                    if (key.t == t && r.values[j] > 0.5) ++active;
                }
                c.require(active <= n, "HP toy exceeds the mode limit at t=" + std::to_string(t));
            }
        }
    }
    return c;
}

Check verification(const StudyResult& s) {
    Check c;
    for (const auto& cell : s.cells) {
        if (!cell.ok) {
            c.require(false, cell_id(cell) + " not solved: " + cell.error);
            continue;
        }
        const auto& r = cell.residuals;
        c.require(r.max_constraint_violation <= 1e-6,
                  cell_id(cell) + " row violation " + std::to_string(r.max_constraint_violation) + " at " +
                      r.worst_constraint);
        c.require(r.max_bound_violation <= 1e-6, cell_id(cell) + " bound violation at " + r.worst_variable);
        c.require(r.max_integrality_violation <= 1e-6, cell_id(cell) + " integrality violation");
        c.require(r.objective_rel_error <= 1e-6, cell_id(cell) + " objective recomputation differs");
        const auto& a = cell.annual;
        c.require(std::abs(a.tac - (a.capex + a.opex)) <= 1e-6 * std::max(1.0, std::abs(a.tac)),
                  cell_id(cell) + " tac != capex + opex");
    }
    return c;
}

// Closed-form annuity in extended precision with integer powers by repeated multiplication.
long double annuity_oracle(long double r, int n) {
    long double q = 1.0L;
    for (int i = 0; i < n; ++i) q *= 1.0L + r;
    return r * q / (q - 1.0L);
}

Check metric_identities(const StudyResult& s, const Dataset& ds) {
    Check c;
    const TimeSeries& prices = ds.prices;
    const TimeSeries& cefs = ds.cefs;
    const std::size_t T = prices.size();

    {
        const TimeSeries flat(std::vector<double>(T, 250.0));
        const double pi = pi_rate(ewap(prices, flat), twap(prices));
        c.require(std::abs(pi - 1.0) <= 1e-12, "flat purchase pi = " + std::to_string(pi));
        const double eps = eps_rate(ewacef(cefs, flat), twacef(cefs));
        c.require(std::abs(eps - 1.0) <= 1e-12, "flat purchase eps");
    }

    std::vector<TimeSeries> purchases;
    for (const auto& cell : s.cells) {
        auto it = cell.annual.hourly.find("buy");
        if (cell.ok && it != cell.annual.hourly.end() &&
            std::any_of(it->second.begin(), it->second.end(), [](double x) { return x > 0.0; })) {
            purchases.emplace_back(it->second);
        }
    }
    std::mt19937_64 rng(20240501);
    std::uniform_real_distribution<double> u(0.0, 2000.0);
    for (int k = 0; k < 5; ++k) {
        std::vector<double> v(T);
        for (auto& x : v) x = u(rng);
        purchases.emplace_back(v);
    }
    c.require(purchases.size() >= 20, "too few purchase profiles");

    const double kappa = 3.7;
    std::vector<double> pk(prices.values()), ck(cefs.values());
    for (auto& x : pk) x *= kappa;
    for (auto& x : ck) x *= kappa;
    const TimeSeries prices_k(pk), cefs_k(ck);

    for (std::size_t i = 0; i < purchases.size(); ++i) {
        const auto& p = purchases[i];
        const std::string tag = "profile " + std::to_string(i);
        const MetricSet m = compute_metrics(prices, cefs, p);
        if (m.omega && m.tcer && m.ecer) {
            c.require(std::abs(*m.omega * *m.tcer - *m.ecer) <= 1e-9 * std::max(1.0, std::abs(*m.ecer)),
                      tag + ": omega * tcer != ecer");
        }
        // EWAP over the week is the volume-weighted mean of its daily EWAPs.
        double num = 0.0, vol = 0.0;
        for (std::size_t d = 0; d + 24 <= T; d += 24) {
            double day_vol = 0.0;
            for (std::size_t t = d; t < d + 24; ++t) day_vol += p[t];
            if (day_vol <= 0.0) continue;
            num += ewap(prices.window(d, 24), p.window(d, 24)) * day_vol;
            vol += day_vol;
        }
        if (vol > 0.0) {
            const double whole = ewap(prices, p);
            c.require(std::abs(num / vol - whole) <= 1e-9 * std::max(1.0, std::abs(whole)), tag + ": ewap not additive");
        }
        const MetricSet mk = compute_metrics(prices_k, cefs_k, p);
        if (m.pi_rate && mk.pi_rate) {
            c.require(std::abs(*m.pi_rate - *mk.pi_rate) <= 1e-12, tag + ": pi not scale invariant");
        }
        if (m.eps_rate && mk.eps_rate) {
            c.require(std::abs(*m.eps_rate - *mk.eps_rate) <= 1e-12, tag + ": eps not scale invariant");
        }
    }

    const double a = annuity_factor(0.10, 25);
    const double oracle = static_cast<double>(annuity_oracle(0.10L, 25));
    c.require(std::abs(a - oracle) <= 1e-12, "annuity_factor disagrees with the extended-precision evaluation");
    c.require(std::abs(a - 0.110168) <= 1e-6, "annuity_factor(0.10, 25) = " + std::to_string(a));
    return c;
}

json pattern_values(const StudyResult& s) {
    json g = json::object();
    for (const auto& cell : s.cells) {
        if (!cell.ok || cell.scenario.ends_with("_d")) continue;
        json v;
        v["tac"] = cell.annual.tac;
        v["pi_rate"] = cell.metrics.pi_rate ? json(*cell.metrics.pi_rate) : json(nullptr);
        v["eps_rate"] = cell.metrics.eps_rate ? json(*cell.metrics.eps_rate) : json(nullptr);
        v["peak_buy"] = cell.metrics.peak_buy;
        g[cell.context][cell.scenario] = v;
    }
    return g;
}

Check pattern(const StudyResult& s, const json& goldens) {
    Check c;
    for (const auto& ctx : s.contexts) {
        const auto* nf = s.find(ctx, "noFlex");
        const auto* ff = s.find(ctx, "fullFlex");
        if (!nf || !ff || !nf->ok || !ff->ok) {
            c.require(false, ctx + ": noFlex or fullFlex missing");
            continue;
        }
        const auto& a = nf->metrics;
        const auto& b = ff->metrics;
        c.require(a.pi_rate && b.pi_rate && *b.pi_rate <= *a.pi_rate + 1e-9, ctx + ": pi(fullFlex) > pi(noFlex)");
        c.require(a.eps_rate && b.eps_rate && *b.eps_rate <= *a.eps_rate + 1e-9, ctx + ": eps(fullFlex) > eps(noFlex)");
        c.require(b.peak_buy <= a.peak_buy + 1e-6, ctx + ": peak(fullFlex) > peak(noFlex)");
    }
    const json now = pattern_values(s);
    if (goldens.is_null()) {
        c.require(false, std::string("no goldens at ") + kGoldens);
        return c;
    }
    const json& pinned = goldens.at("cells");
    for (auto ctx = pinned.begin(); ctx != pinned.end(); ++ctx) {
        for (auto sc = ctx.value().begin(); sc != ctx.value().end(); ++sc) {
            const std::string id = ctx.key() + "/" + sc.key();
            if (!now.contains(ctx.key()) || !now[ctx.key()].contains(sc.key())) {
                c.require(false, id + " missing from the run");
                continue;
            }
            const json& cur = now[ctx.key()][sc.key()];
            for (auto f = sc.value().begin(); f != sc.value().end(); ++f) {
                const json& want = f.value();
                const json& got = cur.at(f.key());
                if (want.is_null() || got.is_null()) {
                    c.require(want.is_null() && got.is_null(), id + " " + f.key() + " definedness changed");
                    continue;
                }
                std::ostringstream m;
                m << id << " " << f.key() << " = " << got.get<double>() << ", pinned " << want.get<double>();
                c.require(close_rel(got.get<double>(), want.get<double>(), 1e-6), m.str());
            }
        }
    }
    return c;
}

Check mps_round_trip(const Dataset& ds, const StudyResult& s) {
    Check c;
    const auto dir = std::filesystem::temp_directory_path() / ("flexopt_acceptance_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    for (const auto& ctx : context_presets(ds.prices)) {
        std::optional<TimeSeries> ref_chp;
        if (const auto* ref = s.find(ctx.name, "REF"); ref && ref->ok) {
            auto [m, r] = build_model(ds, scenario_preset("REF"), ctx);
            ref_chp = chp_dispatch(m, ref->solve);
        }
        for (const auto& sc : scenario_presets()) {
            const std::string id = ctx.name + "/" + sc.name;
            BuildOptions bo;
            if (sc.chp_fixed_to_ref) {
                if (!ref_chp) {
                    c.require(false, id + ": no REF dispatch");
                    continue;
                }
                bo.ref_chp_dispatch = ref_chp;
            }
            auto [m, report] = build_model(ds, sc, ctx, bo);
            const auto path = dir / (ctx.name + "_" + sc.name + ".mps");
            export_mps(m, path);
            const MpsSummary got = read_mps_reference(path);
            const MpsSummary want = summarize(m);
            c.require(got.num_variables == want.num_variables, id + ": variable count differs");
            c.require(got.num_constraints == want.num_constraints, id + ": row count differs");
            c.require(got.num_nonzeros == want.num_nonzeros,
                      id + ": nonzeros " + std::to_string(got.num_nonzeros) + " vs " +
                          std::to_string(want.num_nonzeros));
            c.require(got.integrality == want.integrality, id + ": integrality set differs");
        }
    }
    std::filesystem::remove_all(dir);
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    bool write_goldens = false;
    int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--write-goldens") == 0) {
            write_goldens = true;
        } else if (std::strcmp(argv[i], "--jobs") == 0 && i + 1 < argc) {
            jobs = std::stoi(argv[++i]);
        } else {
            std::cerr << "usage: acceptance [--write-goldens] [--jobs N]\n";
            return 2;
        }
    }

    const Dataset ds = load_bundle(kBundle);
    StudyOptions opts;
    opts.jobs = jobs;
    opts.keep_values = true;
    const auto t0 = std::chrono::steady_clock::now();
    const StudyResult study = run_study(ds, context_presets(ds.prices), scenario_presets(), opts);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "study: " << study.cells.size() << " cells in " << seconds << " s with " << jobs << " job(s)\n";

    if (write_goldens) {
        json g;
        g["dataset"] = "bundle_seed1_168h";
        g["tolerance_rel"] = 1e-6;
        g["cells"] = pattern_values(study);
        std::ofstream(kGoldens) << g.dump(2) << '\n';
        std::cout << "wrote " << kGoldens << '\n';
    }
    json goldens;
    if (std::ifstream in(kGoldens); in) goldens = json::parse(in);

    const Check checks[] = {
        nesting(study, seconds),
        decarb_sign(study),
        decarb_feasibility(study),
        toy_oracles(),
        verification(study),
        metric_identities(study, ds),
        pattern(study, goldens),
        mps_round_trip(ds, study),
    };
    const char* titles[] = {
        "TAC nesting and study runtime",
        "decarbonisation cost is non-negative",
        "net-zero cells use no gas and net emissions vanish",
        "toy models match exhaustive enumeration",
        "solutions verify and tac = capex + opex",
        "metric identities and annuity factor",
        "flexibility lowers pi, eps and peak; pinned values",
        "MPS export round trip",
    };
    bool all = true;
    for (int i = 0; i < 8; ++i) {
        report(i + 1, titles[i], checks[i]);
        all = all && checks[i].passed();
    }
    return all ? 0 : 1;
}
