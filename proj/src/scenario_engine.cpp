#include "flexopt/scenario_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <thread>

#include "json.hpp"

namespace flexopt {

using nlohmann::json;

std::vector<ScenarioConfig> scenario_presets() {
    std::vector<ScenarioConfig> out;

    ScenarioConfig ref;
    ref.name = "REF";
    ref.hp_modes = HpModePolicy::CoolingOnly;
    ref.reference_cooling_machine = true;
    out.push_back(ref);

    ScenarioConfig no;
    no.name = "noFlex";
    no.allow_conversion_invest = true;
    no.chp_fixed_to_ref = true;
    no.hp_modes = HpModePolicy::NoColdToHeat;
    out.push_back(no);

    ScenarioConfig some = no;
    some.name = "someFlex";
    some.use_existing_flex = true;
    some.z_smart = true;
    some.z_v2x = true;
    some.chp_fixed_to_ref = false;
    some.hp_modes = HpModePolicy::All;
    out.push_back(some);

    ScenarioConfig full = some;
    full.name = "fullFlex";
    full.allow_storage_invest = true;
    out.push_back(full);

    for (const ScenarioConfig* base : {&no, &some, &full}) {
        ScenarioConfig d = *base;
        d.name += "_d";
        d.decarbonize = true;
        d.chp_fixed_to_ref = false;
        out.push_back(d);
    }
    return out;
}

ScenarioConfig scenario_preset(const std::string& name) {
    for (auto& s : scenario_presets()) {
        if (s.name == name) return s;
    }
    throw InvalidParameter("unknown scenario '" + name + "'");
}

std::vector<ContextConfig> context_presets(const TimeSeries& base_prices, const ContextPresetParams& params) {
    ContextConfig base{"c_base", params.c_dac_base, base_prices};
    ContextConfig strict{"c_strict", params.c_dac_strict, base_prices};
    ContextConfig scaled{"c_scaled", params.c_dac_scaled,
                         scale_prices(base_prices, params.scaled_price_mean, params.scaled_price_std)};
    return {base, strict, scaled};
}

std::vector<ScenarioConfig> select_scenarios(const std::vector<std::string>& names) {
    auto all = scenario_presets();
    if (names.empty()) return all;
    for (const auto& n : names) scenario_preset(n);
    std::vector<ScenarioConfig> out;
    for (auto& s : all) {
        if (std::find(names.begin(), names.end(), s.name) != names.end()) out.push_back(s);
    }
    return out;
}

std::vector<ContextConfig> select_contexts(const std::vector<std::string>& names, const TimeSeries& base_prices,
                                           const ContextPresetParams& params) {
    auto all = context_presets(base_prices, params);
    if (names.empty()) return all;
    std::vector<ContextConfig> out;
    for (const auto& n : names) {
        if (std::none_of(all.begin(), all.end(), [&](const ContextConfig& c) { return c.name == n; })) {
            throw InvalidParameter("unknown context '" + n + "'");
        }
    }
    for (auto& c : all) {
        if (std::find(names.begin(), names.end(), c.name) != names.end()) out.push_back(c);
    }
    return out;
}

// -----------------------------------------------------------------------------
// Cells
// -----------------------------------------------------------------------------

const CellResult* StudyResult::find(const std::string& context, const std::string& scenario) const {
    for (const auto& c : cells) {
        if (c.context == context && c.scenario == scenario) return &c;
    }
    return nullptr;
}

bool StudyResult::all_solved() const {
    return !cells.empty() && std::all_of(cells.begin(), cells.end(), [](const CellResult& c) { return c.ok; });
}

std::optional<TimeSeries> chp_dispatch(const ModelInstance& model, const SolveResult& result) {
    std::vector<std::pair<int, double>> el;
    for (const auto& [key, idx] : model.select("P_out", "CHP")) {
        if (key.mode == "el") el.emplace_back(key.t, std::max(0.0, result.values.at(idx)));
    }
    if (el.empty()) return std::nullopt;
    std::sort(el.begin(), el.end());
    std::vector<double> v;
    for (const auto& [t, x] : el) v.push_back(x);
    return TimeSeries(std::move(v));
}

namespace {

struct CellRun {
    CellResult cell;
    std::optional<TimeSeries> chp;
};

CellRun run_cell_impl(const Dataset& dataset, const ScenarioConfig& scenario, const ContextConfig& context,
                      const StudyOptions& options, const BuildOptions& build_options) {
    CellRun run;
    CellResult& c = run.cell;
    c.context = context.name;
    c.scenario = scenario.name;
    try {
        auto [model, build] = build_model(dataset, scenario, context, build_options);
        c.build = build;
        c.ng_variables = model.select("P_ng", "NG").size();
        auto backend = options.backend.empty() ? default_backend() : make_backend(options.backend);
        c.solve = backend->solve(model, options.solve);
        if (!c.solve.has_values()) {
            c.error_kind = "solver";
            c.error = "solve ended " + std::string(to_string(c.solve.status));
            return run;
        }
        c.residuals = verify_solution(model, c.solve, options.tolerances);
        c.annual = annual_balances(model, c.solve, dataset, context, build, options.tolerances);
        c.flows = flow_table(model, c.solve, dataset, build);
        const TimeSeries buy(c.annual.hourly.at("buy"), dataset.dt_hours());
        c.metrics = compute_metrics(context.price_series, dataset.cefs, buy, dataset.dt_hours(), build.annual_weight);
        run.chp = chp_dispatch(model, c.solve);
        if (!options.keep_values) {
            c.solve.values.clear();
            c.solve.values.shrink_to_fit();
        }
        c.ok = true;
    } catch (const Error& e) {
        c.ok = false;
        c.error_kind = e.kind();
        c.error = e.what();
    } catch (const std::exception& e) {
        c.ok = false;
        c.error_kind = "internal";
        c.error = e.what();
    }
    return run;
}

/// Runs `tasks` on up to `jobs` threads; each task writes only its own slot.
void run_parallel(std::vector<std::function<void()>>& tasks, int jobs) {
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, jobs)), tasks.size());
    if (workers <= 1) {
        for (auto& t : tasks) t();
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < tasks.size(); i = next++) tasks[i]();
        });
    }
    for (auto& th : pool) th.join();
}

std::optional<double> pct(double value, double base) {
    if (std::abs(base) < 1e-12) return std::nullopt;
    return (value - base) / std::abs(base) * 100.0;
}

}  // namespace

CellResult run_cell(const Dataset& dataset, const ScenarioConfig& scenario, const ContextConfig& context,
                    const StudyOptions& options, const BuildOptions& build) {
    return run_cell_impl(dataset, scenario, context, options, build).cell;
}

StudyResult run_study(const Dataset& dataset, const std::vector<ContextConfig>& contexts,
                      const std::vector<ScenarioConfig>& scenarios, const StudyOptions& options) {
    dataset.validate();
    options.solve.validate();
    if (options.jobs < 1) throw InvalidParameter("jobs must be >= 1");
    std::set<std::string> seen;
    for (const auto& s : scenarios) {
        s.validate();
        if (!seen.insert(s.name).second) throw InvalidParameter("scenario '" + s.name + "' listed twice");
    }
    seen.clear();
    for (const auto& c : contexts) {
        if (!seen.insert(c.name).second) throw InvalidParameter("context '" + c.name + "' listed twice");
    }

    StudyResult study;
    study.horizon = dataset.horizon();
    study.dt_hours = dataset.dt_hours();
    for (const auto& c : contexts) study.contexts.push_back(c.name);
    for (const auto& s : scenarios) study.scenarios.push_back(s.name);

    const std::size_t nc = contexts.size(), ns = scenarios.size();
    std::vector<CellRun> runs(nc * ns);
    const bool needs_ref = std::any_of(scenarios.begin(), scenarios.end(),
                                       [](const ScenarioConfig& s) { return s.chp_fixed_to_ref; });
    const auto ref_it = std::find_if(scenarios.begin(), scenarios.end(),
                                     [](const ScenarioConfig& s) { return s.name == "REF"; });
    const bool ref_selected = ref_it != scenarios.end();
    std::vector<CellRun> aux_ref(nc);

    // Stage 1: everything that does not consume the REF dispatch.
    std::vector<std::function<void()>> stage1, stage2;
    for (std::size_t i = 0; i < nc; ++i) {
        for (std::size_t k = 0; k < ns; ++k) {
            if (scenarios[k].chp_fixed_to_ref) continue;
            stage1.emplace_back([&, i, k] { runs[i * ns + k] = run_cell_impl(dataset, scenarios[k], contexts[i], options, {}); });
        }
        if (needs_ref && !ref_selected) {
            stage1.emplace_back([&, i] {
                aux_ref[i] = run_cell_impl(dataset, scenario_preset("REF"), contexts[i], options, {});
            });
        }
    }
    run_parallel(stage1, options.jobs);

    // Stage 2: cells pinned to the REF CHP dispatch of their context.
    for (std::size_t i = 0; i < nc; ++i) {
        const CellRun& ref = ref_selected ? runs[i * ns + static_cast<std::size_t>(ref_it - scenarios.begin())]
                                          : aux_ref[i];
        for (std::size_t k = 0; k < ns; ++k) {
            if (!scenarios[k].chp_fixed_to_ref) continue;
            stage2.emplace_back([&, i, k] {
                CellRun& slot = runs[i * ns + k];
                if (!ref.cell.ok) {
                    slot.cell.context = contexts[i].name;
                    slot.cell.scenario = scenarios[k].name;
                    slot.cell.error_kind = "dependency";
                    slot.cell.error = "REF cell of context " + contexts[i].name + " did not solve: " + ref.cell.error;
                    return;
                }
                BuildOptions bo;
                bo.ref_chp_dispatch = ref.chp ? *ref.chp : TimeSeries(std::vector<double>(dataset.horizon(), 0.0));
                slot = run_cell_impl(dataset, scenarios[k], contexts[i], options, bo);
            });
        }
        if (needs_ref && !ref_selected) {
            study.notes.push_back("context " + contexts[i].name +
                                  ": REF solved only to provide the CHP dispatch (not part of the selection)");
        }
    }
    run_parallel(stage2, options.jobs);

    for (auto& r : runs) study.cells.push_back(std::move(r.cell));
    aggregate(study);
    return study;
}

std::vector<ParetoPoint> pareto_points(const StudyResult& study, const std::string& context) {
    std::vector<ParetoPoint> out;
    const CellResult* nf = study.find(context, "noFlex");
    const CellResult* nfd = study.find(context, "noFlex_d");
    const bool has_nf = nf && nf->ok;
    const bool has_nfd = nfd && nfd->ok;
    for (const auto& c : study.cells) {
        if (c.context != context || !c.ok) continue;
        ParetoPoint p{c.context, c.scenario, c.annual.tac, c.annual.ce_net, {}, {}, {}};
        if (has_nf) {
            p.tac_pct = pct(p.tac, nf->annual.tac);
            p.ce_pct = pct(p.ce, nf->annual.ce_net);
        }
        if (c.build.decarbonize && has_nfd) p.tac_pct_d = pct(p.tac, nfd->annual.tac);
        out.push_back(p);
    }
    return out;
}

void aggregate(StudyResult& study) {
    study.pairs.clear();
    study.decarb.clear();
    study.pareto.clear();
    for (const auto& ctx : study.contexts) {
        for (const auto& c : study.cells) {
            if (c.context != ctx || !c.ok) continue;
            const bool decarb = c.scenario.size() > 2 && c.scenario.ends_with("_d");
            const std::string baseline = decarb ? "noFlex_d" : "noFlex";
            if (c.scenario == baseline) continue;
            const CellResult* b = study.find(ctx, baseline);
            if (!b || !b->ok) continue;
            study.pairs.push_back({ctx, c.scenario, baseline, pair_metrics(b->metrics, c.metrics)});
        }
        std::optional<double> nf_cost;
        for (const std::string level : {"noFlex", "someFlex", "fullFlex"}) {
            const CellResult* plain = study.find(ctx, level);
            const CellResult* d = study.find(ctx, level + "_d");
            if (!plain || !d || !plain->ok || !d->ok) continue;
            DecarbRecord r{ctx, level, plain->annual.tac, d->annual.tac,
                           decarbonization_cost(plain->annual.tac, d->annual.tac), {}};
            if (level == "noFlex") nf_cost = r.cost;
            if (nf_cost) r.pct_vs_noflex = pct(r.cost, *nf_cost);
            study.decarb.push_back(r);
        }
        auto pts = pareto_points(study, ctx);
        study.pareto.insert(study.pareto.end(), pts.begin(), pts.end());
    }
}

// -----------------------------------------------------------------------------
// Config file
// -----------------------------------------------------------------------------

StudyConfig StudyConfig::from_json_file(const std::filesystem::path& path, const StudyOptions& defaults) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read study config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError("study config is not valid JSON: " + std::string(e.what()));
    }
    static const std::set<std::string> known{"dataset", "synth_seed", "horizon", "contexts", "scenarios",
                                             "context_params", "solve", "jobs", "backend", "out", "format"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.contains(it.key())) throw ValidationError("unknown study config key '" + it.key() + "'");
    }
    StudyConfig c;
    c.options = defaults;
    try {
        const auto base = path.parent_path();
        auto rel = [&](const std::string& p) {
            std::filesystem::path q(p);
            return q.is_absolute() ? q : base / q;
        };
        if (j.contains("dataset")) c.dataset = rel(j["dataset"].get<std::string>());
        if (j.contains("synth_seed")) c.synth_seed = j["synth_seed"].get<std::uint64_t>();
        if (j.contains("horizon")) c.horizon = j["horizon"].get<std::size_t>();
        if (j.contains("contexts")) c.contexts = j["contexts"].get<std::vector<std::string>>();
        if (j.contains("scenarios")) c.scenarios = j["scenarios"].get<std::vector<std::string>>();
        if (j.contains("context_params")) {
            const auto& p = j["context_params"];
            c.context_params.c_dac_base = p.value("c_dac_base", c.context_params.c_dac_base);
            c.context_params.c_dac_strict = p.value("c_dac_strict", c.context_params.c_dac_strict);
            c.context_params.c_dac_scaled = p.value("c_dac_scaled", c.context_params.c_dac_scaled);
            c.context_params.scaled_price_mean = p.value("scaled_price_mean", c.context_params.scaled_price_mean);
            c.context_params.scaled_price_std = p.value("scaled_price_std", c.context_params.scaled_price_std);
        }
        if (j.contains("solve")) {
            const auto& s = j["solve"];
            auto& o = c.options.solve;
            o.mip_gap = s.value("mip_gap", o.mip_gap);
            if (s.contains("time_limit_s") && !s["time_limit_s"].is_null()) o.time_limit_s = s["time_limit_s"].get<double>();
            o.threads = s.value("threads", o.threads);
            o.seed = s.value("seed", o.seed);
        }
        if (j.contains("jobs")) c.options.jobs = j["jobs"].get<int>();
        if (j.contains("backend")) c.options.backend = j["backend"].get<std::string>();
        if (j.contains("out")) c.out = rel(j["out"].get<std::string>());
        if (j.contains("format")) c.format = j["format"].get<std::string>();
    } catch (const json::exception& e) {
        throw ValidationError("malformed study config: " + std::string(e.what()));
    }
    if (c.dataset && c.synth_seed) throw ValidationError("study config names both a dataset and a synth seed");
    return c;
}

}  // namespace flexopt
