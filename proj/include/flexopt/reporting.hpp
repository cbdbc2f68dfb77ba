#pragma once

// Result artifacts recomputed from variable values and input data:
// annual cost/emission balances, energy-flow tables and study emission.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "flexopt/core_types.hpp"
#include "flexopt/ingestion.hpp"
#include "flexopt/model.hpp"
#include "flexopt/model_builder.hpp"
#include "flexopt/solver_backend.hpp"

namespace flexopt {

inline constexpr const char* kStudySchema = "flexopt-study/1";

/// Yearly figures in EUR, t and MWh; short horizons are scaled by BuildReport::annual_weight.
struct AnnualReport {
    double tac = 0.0;
    double capex = 0.0;
    double opex = 0.0;
    double opex_rmi = 0.0;
    double opex_eg_buy = 0.0;
    double opex_eg_sell = 0.0;           ///< revenue, subtracted in opex
    double opex_eg_network_fee = 0.0;    ///< energy add-on plus peak fee
    double opex_wt_network_fee = 0.0;
    double opex_ng = 0.0;
    double opex_ng_tax = 0.0;
    double opex_dac = 0.0;
    double penalty = 0.0;                ///< objective share of the conventional-charging penalty
    double ce_scope1 = 0.0;
    double ce_scope2 = 0.0;
    double ce_removed = 0.0;
    double ce_net = 0.0;
    double peak_buy = 0.0;               ///< kW
    double volume_buy = 0.0;             ///< MWh
    double volume_sell = 0.0;            ///< MWh
    std::map<std::string, double> hp_mode_energy;  ///< condenser MWh per mode
    std::map<std::string, double> new_capacities;  ///< per component, base units
    /// Hourly series for plots: buy, sell, bev_charge, v2x, hp_el, p2h_el (kW).
    std::map<std::string, std::vector<double>> hourly;
};

/// Recomputes every figure from `result.values`; rejects solutions that fail verification.
AnnualReport annual_balances(const ModelInstance& model, const SolveResult& result, const Dataset& dataset,
                             const ContextConfig& context, const BuildReport& build,
                             const VerifyTolerances& tol = {});

struct Flow {
    std::string from;
    std::string to;
    double mwh = 0.0;                    ///< per year
};

struct FlowTable {
    std::vector<Flow> rows;

    /// inflow - outflow per node that must balance (buses, converters, storages).
    std::map<std::string, double> imbalances() const;
    /// Sum of in- and outflows per node.
    std::map<std::string, double> throughput() const;
};

/// Nodes that are sources or sinks of the system and need not balance.
bool is_boundary_node(const std::string& node);

FlowTable flow_table(const ModelInstance& model, const SolveResult& result, const Dataset& dataset,
                     const BuildReport& build);

// -----------------------------------------------------------------------------
// Study emission
// -----------------------------------------------------------------------------

struct StudyResult;

enum class ReportFormat { Json, CsvDir };
ReportFormat report_format_from_string(std::string_view s);

/// json: one file at `path`; csv-dir: directory with one CSV per table kind.
void emit(const StudyResult& study, ReportFormat format, const std::filesystem::path& path);
std::string study_to_json(const StudyResult& study);
StudyResult study_from_json(const std::string& text);
StudyResult load_study(const std::filesystem::path& path);

/// Table names written in csv-dir mode.
std::vector<std::string> csv_table_names();

}  // namespace flexopt
