#pragma once

// Translates a dataset and one (scenario, context) cell into a MILP.
//
// Bus balances (per hour t, kW):
//   ELEC   grid purchase + own-consumed PV/WT + CHP/FC power + BES/V2X discharge
//          = inflexible demand + HP/P2H/Elc input + BES/BEV charge
//   PROC   CHP/HOB/P2H heat + TES discharge = process demand + downgrade + TES charge
//   SPACE  downgrade + HP condenser heat + FC heat + TES discharge = space demand + TES charge
//   COOL   HP evaporator heat from the cold level + TES discharge = cooling demand + TES charge
//   H2     Elc output + H2S discharge = FC input + H2S charge
//   SELL   grid sale = PV and WT feed-in
// Time-summed money and emission terms are scaled to one year by 8760 h / (T dt).

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "flexopt/core_types.hpp"
#include "flexopt/ingestion.hpp"
#include "flexopt/model.hpp"

namespace flexopt {

/// Objective weight of one kW of conventional BEV charging per time-step index
/// (one thousandth of the cost unit per kW, i.e. the penalty is stated in kEUR).
inline constexpr double kPenaltyPerKw = 1000.0;

/// Buses with a per-hour balance row.
enum class Bus { Elec, Proc, Space, Cool, H2, Sell, NaturalGas };
std::string_view to_string(Bus b);

struct BuildReport {
    std::string scenario;
    std::string context;
    std::size_t horizon = 0;
    double dt_hours = 1.0;
    double annual_weight = 1.0;
    double c_dac = 0.0;
    bool decarbonize = false;
    std::vector<HpMode> hp_modes;
    std::map<std::string, std::size_t> variables_by_block;
    std::map<std::string, std::size_t> constraints_by_block;
    std::size_t num_variables = 0;
    std::size_t num_constraints = 0;
    std::size_t num_binaries = 0;
    std::vector<std::string> warnings;
};

struct BuildOptions {
    /// CHP electrical output of the solved reference scenario, required when
    /// the scenario pins the CHP to it.
    std::optional<TimeSeries> ref_chp_dispatch;
};

/// Incremental builder; each add_* call contributes one block.
class ModelBuilder {
public:
    ModelBuilder(const Dataset& dataset, const ScenarioConfig& scenario, const ContextConfig& context);

    void add_grid_block();
    void add_ng_block();
    void add_conversion_block(const TechParams& tech);
    void add_heat_pump_block(const HPParams& hp, HpModePolicy policy, double cap_existing, bool allow_invest);
    void add_vres_block(TechId tech, const TimeSeries& profile);
    /// TES needs a level; BES and H2S ignore it.
    void add_storage_block(TechId tech, std::optional<HeatLevelId> level = std::nullopt);
    void add_bev_block(const std::vector<BevGroup>& groups);
    void add_emissions_and_dac();

    /// Emits bus balances and cost definitions; the builder is spent afterwards.
    std::pair<ModelInstance, BuildReport> finish();

    bool invest_allowed(TechId tech) const;
    double annual_weight() const noexcept { return weight_; }

private:
    std::size_t add_var(const VarKey& key, double lb, double ub, const std::string& block,
                        VarType type = VarType::Continuous);
    void bus(Bus b, int t, std::size_t var, double coef);
    std::optional<std::size_t> add_capacity_var(const TechParams& tech, const std::string& component,
                                                const std::string& symbol, double cap_existing,
                                                bool allow_invest);
    double energy_coef() const;  ///< kW in one step -> annual MWh

    const Dataset& ds_;
    ScenarioConfig scenario_;
    ContextConfig context_;
    std::size_t T_;
    double dt_;
    double weight_;
    ModelInstance model_;
    BuildReport report_;
    std::map<Bus, std::vector<std::vector<Term>>> bus_terms_;
    std::map<Bus, std::vector<double>> bus_rhs_;
    std::vector<Term> capex_terms_;
    std::vector<Term> opex_terms_;
    std::vector<Term> emission_terms_;
    std::vector<Term> penalty_terms_;
    bool grid_added_ = false;
    bool ng_added_ = false;
    bool emissions_added_ = false;
    bool finished_ = false;
    std::optional<std::size_t> ce_dac_;
};

/// Builds the complete cell model with exactly the blocks the scenario enables.
std::pair<ModelInstance, BuildReport> build_model(const Dataset& dataset, const ScenarioConfig& scenario,
                                                  const ContextConfig& context, const BuildOptions& options = {});

/// Adds one equality per hour pinning the CHP electrical output to `ref_dispatch`.
void fix_chp_to_reference(ModelInstance& model, const TimeSeries& ref_dispatch);

/// Registry helpers shared with reporting.
std::string storage_component(TechId tech, std::optional<HeatLevelId> level);
std::string bev_component(const BevGroup& g);
std::string hp_mode_name(const HpMode& m);

}  // namespace flexopt
