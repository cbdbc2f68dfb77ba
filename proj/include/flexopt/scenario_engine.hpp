#pragma once

// Scenario/context presets and the study pipeline
// REF -> noFlex -> someFlex -> fullFlex (+ net-zero variants) per context.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "flexopt/core_types.hpp"
#include "flexopt/ingestion.hpp"
#include "flexopt/metrics.hpp"
#include "flexopt/model_builder.hpp"
#include "flexopt/reporting.hpp"
#include "flexopt/solver_backend.hpp"

namespace flexopt {

/// Seven study scenarios in solve order.
std::vector<ScenarioConfig> scenario_presets();
ScenarioConfig scenario_preset(const std::string& name);

struct ContextPresetParams {
    double c_dac_base = 222.0;
    double c_dac_strict = 10'000.0;
    double c_dac_scaled = 222.0;
    double scaled_price_mean = 97.0;
    double scaled_price_std = 70.0;
};

/// c_base, c_strict, c_scaled.
std::vector<ContextConfig> context_presets(const TimeSeries& base_prices, const ContextPresetParams& params = {});

struct StudyOptions {
    SolveOptions solve;
    int jobs = 1;
    std::string backend;                 ///< empty: FLEXOPT_SOLVER or highs
    VerifyTolerances tolerances;
    bool keep_values = false;            ///< keep full variable vectors in the result
};

struct CellResult {
    std::string context;
    std::string scenario;
    bool ok = false;
    std::string error_kind;              ///< failure record when !ok
    std::string error;
    SolveResult solve;
    BuildReport build;
    ResidualReport residuals;
    AnnualReport annual;
    FlowTable flows;
    MetricSet metrics;
    /// Number of natural-gas purchase variables in the model.
    std::size_t ng_variables = 0;
};

struct PairRecord {
    std::string context;
    std::string scenario;
    std::string baseline;
    PairMetrics pair;
};

struct DecarbRecord {
    std::string context;
    std::string flex_level;              ///< noFlex, someFlex or fullFlex
    double tac_plain = 0.0;
    double tac_decarb = 0.0;
    double cost = 0.0;
    std::optional<double> pct_vs_noflex; ///< relative to the noFlex decarbonisation cost
};

struct ParetoPoint {
    std::string context;
    std::string scenario;
    double tac = 0.0;
    double ce = 0.0;
    std::optional<double> tac_pct;       ///< vs noFlex
    std::optional<double> ce_pct;        ///< vs noFlex
    std::optional<double> tac_pct_d;     ///< vs noFlex_d, net-zero cells only
};

struct StudyResult {
    std::string schema = kStudySchema;
    std::string dataset_label;
    std::size_t horizon = 0;
    double dt_hours = 1.0;
    std::vector<std::string> contexts;
    std::vector<std::string> scenarios;
    std::vector<CellResult> cells;
    std::vector<PairRecord> pairs;
    std::vector<DecarbRecord> decarb;
    std::vector<ParetoPoint> pareto;
    std::vector<std::string> notes;

    const CellResult* find(const std::string& context, const std::string& scenario) const;
    bool all_solved() const;
};

/// Builds, solves, verifies and reports one cell; failures are recorded, not thrown.
CellResult run_cell(const Dataset& dataset, const ScenarioConfig& scenario, const ContextConfig& context,
                    const StudyOptions& options, const BuildOptions& build = {});

/// CHP electrical output of a solved cell, or nullopt when the model has no CHP.
std::optional<TimeSeries> chp_dispatch(const ModelInstance& model, const SolveResult& result);

StudyResult run_study(const Dataset& dataset, const std::vector<ContextConfig>& contexts,
                      const std::vector<ScenarioConfig>& scenarios, const StudyOptions& options = {});

std::vector<ParetoPoint> pareto_points(const StudyResult& study, const std::string& context);

/// Recomputes pairs, decarbonisation costs and Pareto points from the cells.
void aggregate(StudyResult& study);

// -----------------------------------------------------------------------------
// Study configuration file (JSON), see docs/study_config.md.
// -----------------------------------------------------------------------------

struct StudyConfig {
    std::optional<std::filesystem::path> dataset;
    std::optional<std::uint64_t> synth_seed;
    std::optional<std::size_t> horizon;
    std::vector<std::string> contexts;   ///< empty: all presets
    std::vector<std::string> scenarios;  ///< empty: all presets
    ContextPresetParams context_params;
    StudyOptions options;
    std::optional<std::filesystem::path> out;
    std::optional<std::string> format;

    /// Keys present in the file override `defaults`.
    static StudyConfig from_json_file(const std::filesystem::path& path, const StudyOptions& defaults = {});
};

/// Presets filtered by name, in preset order; unknown names throw InvalidParameter.
std::vector<ScenarioConfig> select_scenarios(const std::vector<std::string>& names);
std::vector<ContextConfig> select_contexts(const std::vector<std::string>& names, const TimeSeries& base_prices,
                                           const ContextPresetParams& params = {});

}  // namespace flexopt
