// flexopt command-line front end.
//
// Errors end the process with a nonzero exit code and one JSON object on stderr:
//   {"error":{"kind":"...","message":"..."}}

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "flexopt/ingestion.hpp"
#include "flexopt/metrics.hpp"
#include "flexopt/model_builder.hpp"
#include "flexopt/reporting.hpp"
#include "flexopt/scenario_engine.hpp"
#include "flexopt/solver_backend.hpp"

using namespace flexopt;
using nlohmann::json;

namespace {

constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitUnsolved = 3;

int fail(const std::string& kind, const std::string& message, int code = kExitError) {
    json j = {{"error", {{"kind", kind}, {"message", message}}}};
    std::cerr << j.dump() << std::endl;
    return code;
}

struct DataSource {
    std::string dataset;
    std::optional<std::uint64_t> seed;
    std::size_t horizon = 168;
    std::string synth_params;
};

void add_source_flags(CLI::App* cmd, DataSource& src) {
    cmd->add_option("--dataset", src.dataset, "Dataset bundle directory (contains dataset.json)");
    cmd->add_option("--synth-seed", src.seed, "Generate the synthetic dataset with this seed instead");
    cmd->add_option("--horizon", src.horizon, "Hours of the synthetic dataset")->capture_default_str();
    cmd->add_option("--synth-params", src.synth_params, "Synthetic generator parameter file (JSON)");
}

Dataset load_source(const DataSource& src, std::string& label) {
    if (!src.dataset.empty() && src.seed) throw InvalidParameter("give either --dataset or --synth-seed, not both");
    if (!src.dataset.empty()) {
        label = src.dataset;
        return load_bundle(src.dataset);
    }
    if (!src.seed) throw InvalidParameter("no data source: give --dataset or --synth-seed");
    const SynthParams params = src.synth_params.empty() ? SynthParams{} : SynthParams::from_json_file(src.synth_params);
    label = "synthetic seed " + std::to_string(*src.seed) + ", " + std::to_string(src.horizon) + " h";
    return generate_synthetic_dataset(*src.seed, src.horizon, params);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void log(const std::string& level, const std::string& msg) {
    if (level != "error") std::cerr << msg << std::endl;
}

json metrics_json(const MetricSet& m) {
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    return {{"ewap", opt(m.ewap)},       {"twap", opt(m.twap)},       {"ewacef", opt(m.ewacef)},
            {"twacef", opt(m.twacef)},   {"pi_rate", opt(m.pi_rate)}, {"eps_rate", opt(m.eps_rate)},
            {"omega", opt(m.omega)},     {"tcer", opt(m.tcer)},       {"ecer", opt(m.ecer)},
            {"peak_buy", m.peak_buy},    {"volume_buy", m.volume_buy}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Design and operation optimisation of an industrial multi-energy system"};
    app.require_subcommand(1);
    std::string log_level = "info";
    app.add_option("--log-level", log_level, "error or info")->check(CLI::IsMember({"error", "info"}));

    // synth
    auto* synth = app.add_subcommand("synth", "Write a synthetic dataset bundle");
    std::uint64_t synth_seed = 1;
    std::size_t synth_horizon = 168;
    std::string synth_out, synth_params;
    synth->add_option("--synth-seed", synth_seed, "Generator seed")->capture_default_str();
    synth->add_option("--horizon", synth_horizon, "Hours")->capture_default_str();
    synth->add_option("--synth-params", synth_params, "Generator parameter file (JSON)");
    synth->add_option("--out", synth_out, "Output directory")->required();

    // run
    auto* run = app.add_subcommand("run", "Solve the scenario x context study");
    DataSource run_src;
    add_source_flags(run, run_src);
    std::string run_contexts, run_scenarios, run_out, run_format = "json", run_config;
    double run_gap = 0.0, run_time_limit = 0.0;
    int run_jobs = 1, run_threads = 1;
    bool run_keep_values = false;
    run->add_option("--config", run_config, "Study config file (JSON); overrides flags");
    run->add_option("--contexts", run_contexts, "Comma-separated context names (default: all)");
    run->add_option("--scenarios", run_scenarios, "Comma-separated scenario names (default: all)");
    run->add_option("--mip-gap", run_gap, "Relative MIP gap")->capture_default_str();
    run->add_option("--time-limit", run_time_limit, "Seconds per cell (0: none)");
    run->add_option("--threads", run_threads, "Solver threads per cell")->capture_default_str();
    run->add_option("--jobs", run_jobs, "Cells solved concurrently")->capture_default_str();
    run->add_option("--out", run_out, "Output file (json) or directory (csv-dir)");
    run->add_option("--format", run_format, "json or csv-dir")->capture_default_str();
    run->add_flag("--keep-values", run_keep_values, "Keep full solution vectors (json only)");

    // metrics
    auto* met = app.add_subcommand("metrics", "Demand-response metrics of a purchase profile");
    std::string met_prices, met_cefs, met_load, met_window, met_out;
    double met_dt = 1.0;
    met->add_option("--prices", met_prices, "Price CSV (t,value)")->required();
    met->add_option("--cefs", met_cefs, "CEF CSV (t,value)")->required();
    met->add_option("--load", met_load, "Grid purchase CSV (t,value)")->required();
    met->add_option("--window", met_window, "Hour window first:count (default: all)");
    met->add_option("--dt", met_dt, "Step length in hours")->capture_default_str();
    met->add_option("--out", met_out, "Write JSON here instead of stdout");

    // export_mps
    auto* mps = app.add_subcommand("export_mps", "Build one cell and write it as MPS");
    DataSource mps_src;
    add_source_flags(mps, mps_src);
    std::string mps_context = "c_base", mps_scenario = "fullFlex", mps_out;
    double mps_gap = 0.0;
    mps->add_option("--context", mps_context, "Context name")->capture_default_str();
    mps->add_option("--scenario", mps_scenario, "Scenario name")->capture_default_str();
    mps->add_option("--mip-gap", mps_gap, "Gap for the REF solve a pinned scenario depends on");
    mps->add_option("--out", mps_out, "MPS file")->required();

    // report
    auto* rep = app.add_subcommand("report", "Re-emit reports from a stored study");
    std::string rep_study, rep_format = "csv-dir", rep_out;
    rep->add_option("--study", rep_study, "Study JSON written by run")->required();
    rep->add_option("--format", rep_format, "json or csv-dir")->capture_default_str();
    rep->add_option("--out", rep_out, "Output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what(), kExitUsage);
    }

    try {
        if (*synth) {
            const SynthParams params = synth_params.empty() ? SynthParams{} : SynthParams::from_json_file(synth_params);
            const Dataset ds = generate_synthetic_dataset(synth_seed, synth_horizon, params);
            save_bundle(ds, synth_out);
            log(log_level, "wrote dataset bundle " + synth_out);
            return 0;
        }

        if (*run) {
            StudyOptions opts;
            opts.solve.mip_gap = run_gap;
            if (run_time_limit > 0.0) opts.solve.time_limit_s = run_time_limit;
            opts.solve.threads = run_threads;
            opts.jobs = run_jobs;
            opts.keep_values = run_keep_values;
            // Config file values win over flags.
            StudyConfig cfg;
            if (!run_config.empty()) cfg = StudyConfig::from_json_file(run_config, opts);
            else cfg.options = opts;
            opts = cfg.options;
            DataSource src = run_src;
            if (cfg.dataset) {
                src.dataset = cfg.dataset->string();
                src.seed.reset();
            }
            if (cfg.synth_seed) {
                src.seed = cfg.synth_seed;
                src.dataset.clear();
            }
            if (cfg.horizon) src.horizon = *cfg.horizon;
            std::string label;
            const Dataset ds = load_source(src, label);

            auto ctx_names = cfg.contexts.empty() ? split_list(run_contexts) : cfg.contexts;
            auto scen_names = cfg.scenarios.empty() ? split_list(run_scenarios) : cfg.scenarios;
            const auto contexts = select_contexts(ctx_names, ds.prices, cfg.context_params);
            const auto scenarios = select_scenarios(scen_names);
            std::string format = cfg.format.value_or(run_format);
            const ReportFormat fmt = report_format_from_string(format);
            std::string out = cfg.out ? cfg.out->string() : run_out;
            if (out.empty()) out = fmt == ReportFormat::Json ? "study.json" : "study";

            if (opts.backend.empty()) {
                default_backend();
            } else {
                make_backend(opts.backend);
            }
            log(log_level, "solving " + std::to_string(contexts.size() * scenarios.size()) + " cells on " + label);
            StudyResult study = run_study(ds, contexts, scenarios, opts);
            study.dataset_label = label;
            emit(study, fmt, out);
            for (const auto& c : study.cells) {
                std::ostringstream os;
                os << c.context << " " << c.scenario << ": ";
                if (c.ok) {
                    os << "TAC " << c.annual.tac << " EUR, CE " << c.annual.ce_net << " t, " << c.solve.runtime_s << " s";
                } else {
                    os << "FAILED (" << c.error_kind << ") " << c.error;
                }
                log(log_level, os.str());
            }
            log(log_level, "wrote " + out);
            if (!study.all_solved()) {
                std::size_t failed = 0;
                for (const auto& c : study.cells) failed += c.ok ? 0 : 1;
                return fail("unsolved", std::to_string(failed) + " cell(s) did not solve; see " + out, kExitUnsolved);
            }
            return 0;
        }

        if (*met) {
            const TimeSeries prices = load_timeseries(met_prices, {"value", std::nullopt, met_dt});
            const TimeSeries cefs = load_timeseries(met_cefs, {"value", prices.size(), met_dt});
            const TimeSeries load = load_timeseries(met_load, {"value", prices.size(), met_dt});
            std::size_t first = 0, count = prices.size();
            if (!met_window.empty()) {
                const auto colon = met_window.find(':');
                if (colon == std::string::npos) throw InvalidParameter("--window expects first:count");
                first = std::stoul(met_window.substr(0, colon));
                count = std::stoul(met_window.substr(colon + 1));
                if (count == 0 || first + count > prices.size()) throw InvalidParameter("--window outside the series");
            }
            const MetricSet m = compute_metrics(prices, cefs, load, first, count, met_dt);
            json j = metrics_json(m);
            j["window"] = {{"first", first}, {"count", count}};
            if (met_out.empty()) {
                std::cout << j.dump(2) << std::endl;
            } else {
                std::ofstream f(met_out);
                if (!f) throw IoError("cannot write " + met_out);
                f << j.dump(2) << '\n';
            }
            return 0;
        }

        if (*mps) {
            std::string label;
            const Dataset ds = load_source(mps_src, label);
            const auto contexts = select_contexts({mps_context}, ds.prices);
            const ScenarioConfig scenario = scenario_preset(mps_scenario);
            BuildOptions bo;
            if (scenario.chp_fixed_to_ref) {
                SolveOptions so;
                so.mip_gap = mps_gap;
                auto [ref_model, ref_build] = build_model(ds, scenario_preset("REF"), contexts[0]);
                const SolveResult ref = default_backend()->solve(ref_model, so);
                if (!ref.has_values()) throw SolverError("REF did not solve; cannot pin the CHP");
                auto chp = chp_dispatch(ref_model, ref);
                bo.ref_chp_dispatch = chp ? *chp : TimeSeries(std::vector<double>(ds.horizon(), 0.0));
                log(log_level, "solved REF to pin the CHP dispatch");
            }
            auto [model, build] = build_model(ds, scenario, contexts[0], bo);
            export_mps(model, mps_out);
            std::ostringstream os;
            os << "wrote " << mps_out << " (" << model.num_variables() << " columns, " << model.num_constraints()
               << " rows, " << model.num_nonzeros() << " nonzeros, " << model.num_binaries() << " binaries)";
            log(log_level, os.str());
            return 0;
        }

        if (*rep) {
            const StudyResult study = load_study(rep_study);
            emit(study, report_format_from_string(rep_format), rep_out);
            log(log_level, "wrote " + rep_out);
            return 0;
        }
    } catch (const Error& e) {
        return fail(e.kind(), e.what());
    } catch (const std::exception& e) {
        return fail("internal", e.what());
    }
    return fail("usage", "no subcommand given", kExitUsage);
}
