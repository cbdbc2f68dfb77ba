#pragma once

// Small hand-checkable cells with brute-force oracles.

#include <vector>

#include "flexopt/ingestion.hpp"
#include "flexopt/model_builder.hpp"
#include "flexopt/solver_backend.hpp"

namespace toys {

/// T-hour dataset with every technology absent, zero demands and zero grid fees.
flexopt::Dataset empty_dataset(std::vector<double> prices);

flexopt::ScenarioConfig plain_scenario(const char* name = "toy");
flexopt::ContextConfig context_for(const flexopt::Dataset& ds, double c_dac = 222.0);

// Storage arbitrage: prices [10, 50, 10] EUR/MWh, 1 kW load, 1 kWh lossless BES
// starting and ending empty, C-rate 1.
flexopt::Dataset bes_arbitrage_dataset();
/// Cheapest annual cost over SOC trajectories on a 0.01 kWh grid.
double bes_arbitrage_enumeration(const flexopt::Dataset& ds);

// One BEV group away in hour 0 (30 kWh driven), back for hours 1 and 2 where
// 30 kWh must be recharged; prices [10, 50, 20].
flexopt::Dataset bev_recharge_dataset();
struct BevOracle {
    double objective = 0.0;
    double charge_hour1 = 0.0;   ///< kWh charged in hour 1 at the optimum
};
/// Enumerates the split of the recharge over hours 1 and 2 on a 0.01 kWh grid.
BevOracle bev_recharge_enumeration(const flexopt::Dataset& ds, bool smart);

// Two hours of cooling and space-heat demand served by one heat pump
// (all modes) plus a gas boiler.
flexopt::Dataset hp_modes_dataset(int n_modes);

/// Minimum over every assignment of at most `n_modes` active modes per hour,
/// each branch solved as an LP with the other modes' binaries fixed to 0.
double hp_mode_enumeration(const flexopt::ModelInstance& model, int n_modes);

}  // namespace toys
