#include "toys.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace toys {

using namespace flexopt;

namespace {

TimeSeries zeros(std::size_t n) { return TimeSeries(std::vector<double>(n, 0.0)); }

double annual_weight(const Dataset& ds) { return 8760.0 / static_cast<double>(ds.horizon()); }

}  // namespace

Dataset empty_dataset(std::vector<double> prices) {
    const std::size_t T = prices.size();
    Dataset ds;
    ds.prices = TimeSeries(std::move(prices));
    ds.cefs = TimeSeries(std::vector<double>(T, 0.3));
    ds.edem = zeros(T);
    for (HeatLevelId id : {HeatLevelId::COOL_7_12, HeatLevelId::SPACE_75_55, HeatLevelId::PROC_95_75}) {
        ds.heat_dem[id] = zeros(T);
    }
    ds.pv_profile = zeros(T);
    ds.wt_profile = zeros(T);
    ds.grid.c_addon = 0.0;
    ds.grid.c_peak_fee = 0.0;
    ds.catalog = default_catalog();
    for (auto& [id, p] : ds.catalog.techs) {
        p.cap_existing = 0.0;
        p.cap_new_max = 0.0;
    }
    ds.catalog.reference_cooling_machine_kw = 0.0;
    ds.heat_pump = default_heat_pump();
    return ds;
}

ScenarioConfig plain_scenario(const char* name) {
    ScenarioConfig s;
    s.name = name;
    s.hp_modes = HpModePolicy::All;
    return s;
}

ContextConfig context_for(const Dataset& ds, double c_dac) { return {"toy", c_dac, ds.prices}; }

Dataset bes_arbitrage_dataset() {
    Dataset ds = empty_dataset({10.0, 50.0, 10.0});
    ds.edem = TimeSeries(std::vector<double>{1.0, 1.0, 1.0});
    TechParams& bes = ds.catalog.techs.at(TechId::BES);
    bes.cap_existing = 1.0;
    bes.eta_cycle = 1.0;
    bes.eta_time = 1.0;
    bes.c_rate_in = 1.0;
    bes.c_rate_out = 1.0;
    bes.k_ini = 0.0;
    return ds;
}

double bes_arbitrage_enumeration(const Dataset& ds) {
    const double w = annual_weight(ds) * 1e-3;
    double best = std::numeric_limits<double>::infinity();
    // SOC after hours 0 and 1; hour 2 must end at the initial (empty) state.
    for (int a = 0; a <= 100; ++a) {
        for (int b = 0; b <= 100; ++b) {
            const double soc[4] = {0.0, a / 100.0, b / 100.0, 0.0};
            double cost = 0.0;
            bool ok = true;
            for (int t = 0; t < 3; ++t) {
                const double flow = soc[t + 1] - soc[t];
                if (std::abs(flow) > 1.0 + 1e-12) ok = false;
                const double buy = ds.edem[t] + flow;
                if (buy < -1e-12) ok = false;
                cost += ds.prices[t] * buy;
            }
            if (ok) best = std::min(best, w * cost);
        }
    }
    return best;
}

Dataset bev_recharge_dataset() {
    Dataset ds = empty_dataset({10.0, 50.0, 20.0});
    BevGroup g;
    g.group_id = "fleet";
    g.e_cap = 100.0;
    g.k_empty = 0.0;
    g.k_ini = 0.5;
    g.k_full = 1.0;
    g.lambda_in = 1.0;
    g.lambda_v2x = 1.0;
    g.eta_cycle = 1.0;
    g.avail = TimeSeries(std::vector<double>{0.0, 1.0, 1.0});
    g.drive = TimeSeries(std::vector<double>{30.0, 0.0, 0.0});
    ds.bev_groups = {g};
    return ds;
}

BevOracle bev_recharge_enumeration(const Dataset& ds, bool smart) {
    const double w = annual_weight(ds) * 1e-3;
    BevOracle best{std::numeric_limits<double>::infinity(), 0.0};
    for (int k = 0; k <= 3000; ++k) {
        const double x1 = k / 100.0;
        const double x2 = 30.0 - x1;
        double obj = w * (ds.prices[1] * x1 + ds.prices[2] * x2);
        if (!smart) obj += kPenaltyPerKw * (2.0 * x1 + 3.0 * x2);
        if (obj < best.objective) best = {obj, x1};
    }
    return best;
}

Dataset hp_modes_dataset(int n_modes) {
    Dataset ds = empty_dataset({40.0, 80.0});
    ds.heat_dem[HeatLevelId::COOL_7_12] = TimeSeries(std::vector<double>{100.0, 100.0});
    ds.heat_dem[HeatLevelId::SPACE_75_55] = TimeSeries(std::vector<double>{200.0, 150.0});
    ds.catalog.techs.at(TechId::HP).cap_existing = 500.0;
    ds.catalog.techs.at(TechId::HOB).cap_existing = 1000.0;
    ds.heat_pump.n_modes = n_modes;
    return ds;
}

double hp_mode_enumeration(const ModelInstance& model, int n_modes) {
    // Binaries grouped by hour.
    std::map<int, std::vector<std::size_t>> by_hour;
    for (std::size_t j = 0; j < model.num_variables(); ++j) {
        if (model.variables()[j].type == VarType::Binary) by_hour[model.key_of(j).t].push_back(j);
    }
    std::vector<std::vector<std::set<std::size_t>>> choices;
    for (const auto& [t, ys] : by_hour) {
        std::vector<std::set<std::size_t>> c;
        const std::size_t m = ys.size();
        for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
            std::set<std::size_t> on;
            for (std::size_t i = 0; i < m; ++i) {
                if (mask & (std::size_t{1} << i)) on.insert(ys[i]);
            }
            if (static_cast<int>(on.size()) <= n_modes) c.push_back(on);
        }
        choices.push_back(c);
    }
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> idx(choices.size(), 0);
    auto backend = make_backend("highs");
    while (true) {
        ModelInstance lp = model;
        std::size_t h = 0;
        for (const auto& [t, ys] : by_hour) {
            const auto& on = choices[h][idx[h]];
            for (std::size_t y : ys) {
                const double v = on.contains(y) ? 1.0 : 0.0;
                lp.set_bounds(y, v, v);
            }
            ++h;
        }
        const SolveResult r = backend->solve(lp, {});
        if (r.status == SolveStatus::Optimal) best = std::min(best, r.objective);
        std::size_t k = 0;
        while (k < idx.size() && ++idx[k] == choices[k].size()) idx[k++] = 0;
        if (k == idx.size()) break;
    }
    return best;
}

}  // namespace toys
