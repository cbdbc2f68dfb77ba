#include "flexopt/model_builder.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace flexopt {

namespace {

constexpr double kKwhToMwh = 1e-3;

std::string level_component(HeatLevelId id) { return std::string(to_string(id)); }

Bus heat_bus(HeatLevelId id) {
    switch (id) {
        case HeatLevelId::COOL_7_12: return Bus::Cool;
        case HeatLevelId::SPACE_75_55: return Bus::Space;
        case HeatLevelId::PROC_95_75: return Bus::Proc;
    }
    return Bus::Proc;
}

const char* carrier_tag(Carrier c) {
    switch (c) {
        case Carrier::Electricity: return "el";
        case Carrier::Heat: return "heat";
        case Carrier::Hydrogen: return "h2";
    }
    return "?";
}

/// Input carrier of a conversion technology.
std::string input_tag(TechId id) {
    switch (id) {
        case TechId::CHP:
        case TechId::HOB: return "ng";
        case TechId::P2H:
        case TechId::Elc: return "el";
        case TechId::FC: return "h2";
        default: throw InvalidParameter("unknown conversion technology " + std::string(to_string(id)));
    }
}

bool is_conversion(TechId id) {
    return id == TechId::CHP || id == TechId::Elc || id == TechId::FC || id == TechId::HOB || id == TechId::P2H;
}

Carrier base_carrier(BaseUnit u) {
    switch (u) {
        case BaseUnit::kW_el:
        case BaseUnit::kWh_el:
        case BaseUnit::kW_p: return Carrier::Electricity;
        case BaseUnit::kW_th:
        case BaseUnit::kWh_th: return Carrier::Heat;
        case BaseUnit::kWh_H2: return Carrier::Hydrogen;
    }
    return Carrier::Electricity;
}

}  // namespace

std::string_view to_string(Bus b) {
    switch (b) {
        case Bus::Elec: return "ELEC";
        case Bus::Proc: return "PROC_95_75";
        case Bus::Space: return "SPACE_75_55";
        case Bus::Cool: return "COOL_7_12";
        case Bus::H2: return "H2";
        case Bus::Sell: return "SELL";
        case Bus::NaturalGas: return "NG";
    }
    return "?";
}

std::string storage_component(TechId tech, std::optional<HeatLevelId> level) {
    if (tech == TechId::TES) {
        if (!level) throw InvalidParameter("TES requires a heat level");
        return "TES_" + level_component(*level);
    }
    return std::string(to_string(tech));
}

std::string bev_component(const BevGroup& g) { return "BEV_" + g.group_id; }

std::string hp_mode_name(const HpMode& m) { return m.source + "->" + m.sink; }

// -----------------------------------------------------------------------------
// ModelBuilder
// -----------------------------------------------------------------------------

ModelBuilder::ModelBuilder(const Dataset& dataset, const ScenarioConfig& scenario, const ContextConfig& context)
    : ds_(dataset), scenario_(scenario), context_(context) {
    scenario_.validate();
    context_.validate();
    T_ = ds_.horizon();
    dt_ = ds_.dt_hours();
    if (context_.price_series.size() != T_) {
        throw BuildError("context " + context_.name + ": price series length " +
                         std::to_string(context_.price_series.size()) + " does not match horizon " +
                         std::to_string(T_));
    }
    weight_ = 8760.0 / (static_cast<double>(T_) * dt_);
    report_.scenario = scenario_.name;
    report_.context = context_.name;
    report_.horizon = T_;
    report_.dt_hours = dt_;
    report_.annual_weight = weight_;
    report_.c_dac = context_.c_dac;
    report_.decarbonize = scenario_.decarbonize;

    for (Bus b : {Bus::Elec, Bus::Proc, Bus::Space, Bus::Cool, Bus::Sell}) {
        bus_terms_[b].resize(T_);
        bus_rhs_[b].assign(T_, 0.0);
    }
    bus_rhs_[Bus::Elec] = ds_.edem.values();
    bus_rhs_[Bus::Proc] = ds_.heat_dem.at(HeatLevelId::PROC_95_75).values();
    bus_rhs_[Bus::Space] = ds_.heat_dem.at(HeatLevelId::SPACE_75_55).values();
    bus_rhs_[Bus::Cool] = ds_.heat_dem.at(HeatLevelId::COOL_7_12).values();

    // Heat downgrading 95/75 -> 75/55 is always available.
    for (std::size_t t = 0; t < T_; ++t) {
        const auto v = add_var({"Q_hd", "HD", "", static_cast<int>(t)}, 0.0, kInf, "balance");
        bus(Bus::Proc, static_cast<int>(t), v, -1.0);
        bus(Bus::Space, static_cast<int>(t), v, 1.0);
    }
}

double ModelBuilder::energy_coef() const { return weight_ * dt_ * kKwhToMwh; }

std::size_t ModelBuilder::add_var(const VarKey& key, double lb, double ub, const std::string& block, VarType type) {
    return model_.add_variable(key, lb, ub, type, block);
}

void ModelBuilder::bus(Bus b, int t, std::size_t var, double coef) {
    auto& terms = bus_terms_[b];
    if (terms.empty()) {
        terms.resize(T_);
        bus_rhs_[b].assign(T_, 0.0);
    }
    terms[static_cast<std::size_t>(t)].push_back({var, coef});
}

bool ModelBuilder::invest_allowed(TechId tech) const {
    switch (tech) {
        case TechId::PV:
        case TechId::WT:
        case TechId::HP:
        case TechId::P2H:
        case TechId::CHP:
        case TechId::HOB: return scenario_.allow_conversion_invest;
        case TechId::BES:
        case TechId::TES:
        case TechId::H2S:
        case TechId::Elc:
        case TechId::FC: return scenario_.allow_storage_invest;
        case TechId::BEV: return false;
    }
    return false;
}

std::optional<std::size_t> ModelBuilder::add_capacity_var(const TechParams& tech, const std::string& component,
                                                          const std::string& symbol, double /*cap_existing*/,
                                                          bool allow_invest) {
    if (!allow_invest || !(tech.cap_new_max > 0.0)) return std::nullopt;
    const auto v = add_var({symbol, component, "", -1}, 0.0, tech.cap_new_max, component);
    const double capex = annuity_factor(ds_.catalog.discount_rate, tech.life_years) * tech.c_inv;
    capex_terms_.push_back({v, capex});
    opex_terms_.push_back({v, tech.rmi_frac * tech.c_inv});
    return v;
}

void ModelBuilder::add_grid_block() {
    if (grid_added_) throw ContractViolation("grid block added twice");
    grid_added_ = true;
    const auto& g = ds_.grid;
    const double e = energy_coef();
    const auto peak = add_var({"P_peak", "EG", "", -1}, 0.0, g.p_buy_max, "grid");
    opex_terms_.push_back({peak, g.c_peak_fee});
    for (std::size_t t = 0; t < T_; ++t) {
        const int ti = static_cast<int>(t);
        const auto buy = add_var({"P_buy", "EG", "", ti}, 0.0, g.p_buy_max, "grid");
        const auto sell = add_var({"P_sell", "EG", "", ti}, 0.0, g.p_sell_max, "grid");
        const double price = context_.price_series[t];
        opex_terms_.push_back({buy, e * (price + g.c_addon)});
        opex_terms_.push_back({sell, -e * price});
        emission_terms_.push_back({buy, e * ds_.cefs[t]});
        bus(Bus::Elec, ti, buy, 1.0);
        bus(Bus::Sell, ti, sell, 1.0);
        model_.add_constraint("peak[" + std::to_string(t) + "]", {{buy, 1.0}, {peak, -1.0}}, Sense::LessEqual, 0.0,
                              "grid");
    }
}

void ModelBuilder::add_ng_block() {
    if (scenario_.decarbonize) {
        throw ContractViolation("natural gas block requested for decarbonized scenario " + scenario_.name);
    }
    if (ng_added_) throw ContractViolation("natural gas block added twice");
    ng_added_ = true;
    const auto& f = ds_.fuel;
    const double e = energy_coef();
    bus_terms_[Bus::NaturalGas].resize(T_);
    bus_rhs_[Bus::NaturalGas].assign(T_, 0.0);
    for (std::size_t t = 0; t < T_; ++t) {
        const auto ng = add_var({"P_ng", "NG", "", static_cast<int>(t)}, 0.0, kInf, "ng");
        opex_terms_.push_back({ng, e * (f.c_ng + f.c_carbon_tax * f.cef_ng)});
        emission_terms_.push_back({ng, e * f.cef_ng});
        bus(Bus::NaturalGas, static_cast<int>(t), ng, 1.0);
    }
}

void ModelBuilder::add_conversion_block(const TechParams& tech) {
    if (!is_conversion(tech.tech_id)) {
        throw InvalidParameter("add_conversion_block: " + std::string(to_string(tech.tech_id)) +
                               " is not a conversion technology");
    }
    tech.validate();
    const std::string comp(to_string(tech.tech_id));
    const std::string in_tag = input_tag(tech.tech_id);
    if (in_tag == "ng" && scenario_.decarbonize) {
        throw ContractViolation(comp + " burns natural gas, which scenario " + scenario_.name + " forbids");
    }
    if (tech.efficiencies.empty()) throw InvalidParameter(comp + ": no output efficiencies");

    const auto capn = add_capacity_var(tech, comp, "P_capn", tech.cap_existing, invest_allowed(tech.tech_id));
    const double capx = tech.cap_existing;
    const Carrier ref_carrier = base_carrier(tech.base_unit);
    const bool ref_is_output = tech.efficiencies.contains(ref_carrier);
    // Without new capacity the reference flow is bounded directly.
    const double direct_ub = capn ? kInf : capx;

    auto output_bus = [&](Carrier c) {
        if (c == Carrier::Electricity) return Bus::Elec;
        if (c == Carrier::Hydrogen) return Bus::H2;
        return tech.tech_id == TechId::FC ? Bus::Space : Bus::Proc;
    };

    for (std::size_t t = 0; t < T_; ++t) {
        const int ti = static_cast<int>(t);
        const auto in = add_var({"P_in", comp, in_tag, ti}, 0.0, ref_is_output ? kInf : direct_ub, comp);
        if (in_tag == "ng") {
            if (!ng_added_) throw ContractViolation(comp + " added before the natural gas block");
            bus(Bus::NaturalGas, ti, in, -1.0);
        } else if (in_tag == "el") {
            bus(Bus::Elec, ti, in, -1.0);
        } else {
            bus(Bus::H2, ti, in, -1.0);
        }
        std::size_t ref_flow = in;
        for (const auto& [carrier, eta] : tech.efficiencies) {
            const bool is_ref = ref_is_output && carrier == ref_carrier;
            const auto out = add_var({"P_out", comp, carrier_tag(carrier), ti}, 0.0, is_ref ? direct_ub : kInf, comp);
            model_.add_constraint(comp + "_" + carrier_tag(carrier) + "[" + std::to_string(t) + "]",
                                  {{out, 1.0}, {in, -eta}}, Sense::Equal, 0.0, comp);
            bus(output_bus(carrier), ti, out, 1.0);
            if (is_ref) ref_flow = out;
        }
        if (capn) {
            model_.add_constraint(comp + "_cap[" + std::to_string(t) + "]", {{ref_flow, 1.0}, {*capn, -1.0}},
                                  Sense::LessEqual, capx, comp);
        }
    }
}

void ModelBuilder::add_heat_pump_block(const HPParams& hp, HpModePolicy policy, double cap_existing,
                                       bool allow_invest) {
    std::vector<std::string> excluded;
    auto modes = enumerate_hp_modes(hp, &excluded);
    for (const auto& e : excluded) report_.warnings.push_back("heat pump mode excluded: " + e);
    const std::string cool = std::string(to_string(HeatLevelId::COOL_7_12));
    const std::string space = std::string(to_string(HeatLevelId::SPACE_75_55));
    const std::string well = well_level().name;
    std::erase_if(modes, [&](const HpMode& m) {
        bool drop = false;
        if (policy == HpModePolicy::CoolingOnly) drop = !(m.source == cool && m.sink == well);
        if (policy == HpModePolicy::NoColdToHeat) drop = m.source == cool && m.sink == space;
        if (drop) report_.warnings.push_back("heat pump mode disabled by scenario: " + hp_mode_name(m));
        return drop;
    });
    if (modes.empty()) throw BuildError("heat pump has no valid operating mode");
    for (const auto& m : modes) {
        const bool known_source = m.source == cool || m.source == well;
        const bool known_sink = m.sink == space || m.sink == well;
        if (!known_source || !known_sink) {
            throw BuildError("heat pump mode " + hp_mode_name(m) + " is not connected to a modelled level");
        }
    }
    report_.hp_modes = modes;

    TechParams params = ds_.catalog.at(TechId::HP);
    params.cap_existing = cap_existing;
    const auto capn = add_capacity_var(params, "HP", "P_capn", cap_existing, allow_invest);
    const double q_max = cap_existing + (capn ? params.cap_new_max : 0.0);
    if (!std::isfinite(q_max)) throw BuildError("heat pump needs a finite capacity bound for its mode constraints");

    for (std::size_t t = 0; t < T_; ++t) {
        const int ti = static_cast<int>(t);
        std::vector<Term> cap_terms, mode_terms;
        for (const auto& m : modes) {
            const std::string mn = hp_mode_name(m);
            const auto q = add_var({"Q_hp", "HP", mn, ti}, 0.0, q_max, "HP");
            const auto y = add_var({"Y_hp", "HP", mn, ti}, 0.0, 1.0, "HP", VarType::Binary);
            model_.add_constraint("HP_mode[" + mn + "," + std::to_string(t) + "]", {{q, 1.0}, {y, -q_max}},
                                  Sense::LessEqual, 0.0, "HP");
            bus(Bus::Elec, ti, q, -1.0 / m.cop);
            if (m.sink == space) bus(Bus::Space, ti, q, 1.0);
            if (m.source == cool) bus(Bus::Cool, ti, q, 1.0 - 1.0 / m.cop);
            cap_terms.push_back({q, 1.0});
            mode_terms.push_back({y, 1.0});
        }
        model_.add_constraint("HP_modes[" + std::to_string(t) + "]", std::move(mode_terms), Sense::LessEqual,
                              static_cast<double>(hp.n_modes), "HP");
        if (capn) cap_terms.push_back({*capn, -1.0});
        model_.add_constraint("HP_cap[" + std::to_string(t) + "]", std::move(cap_terms), Sense::LessEqual,
                              cap_existing, "HP");
    }
}

void ModelBuilder::add_vres_block(TechId tech, const TimeSeries& profile) {
    if (tech != TechId::PV && tech != TechId::WT) {
        throw InvalidParameter("add_vres_block: " + std::string(to_string(tech)) + " is not PV or WT");
    }
    if (profile.size() != T_) {
        throw BuildError(std::string(to_string(tech)) + " profile length " + std::to_string(profile.size()) +
                         " does not match horizon " + std::to_string(T_));
    }
    const TechParams& p = ds_.catalog.at(tech);
    const std::string comp(to_string(tech));
    const auto capn = add_capacity_var(p, comp, "P_capn", p.cap_existing, invest_allowed(tech));
    const double e = energy_coef();
    for (std::size_t t = 0; t < T_; ++t) {
        const int ti = static_cast<int>(t);
        const auto oc = add_var({"P_oc", comp, "", ti}, 0.0, kInf, comp);
        const auto fi = add_var({"P_fi", comp, "", ti}, 0.0, kInf, comp);
        std::vector<Term> terms{{oc, 1.0}, {fi, 1.0}};
        if (capn) terms.push_back({*capn, -profile[t]});
        model_.add_constraint(comp + "_gen[" + std::to_string(t) + "]", std::move(terms), Sense::Equal,
                              profile[t] * p.cap_existing, comp);
        bus(Bus::Elec, ti, oc, 1.0);
        bus(Bus::Sell, ti, fi, -1.0);
        if (tech == TechId::WT) opex_terms_.push_back({oc, e * ds_.grid.c_addon});
    }
}

void ModelBuilder::add_storage_block(TechId tech, std::optional<HeatLevelId> level) {
    if (tech != TechId::BES && tech != TechId::TES && tech != TechId::H2S) {
        throw InvalidParameter("add_storage_block: " + std::string(to_string(tech)) + " is not a storage");
    }
    const TechParams& p = ds_.catalog.at(tech);
    const std::string comp = storage_component(tech, level);
    const Bus b = tech == TechId::BES ? Bus::Elec : tech == TechId::H2S ? Bus::H2 : heat_bus(*level);
    const auto capn = add_capacity_var(p, comp, "E_capn", p.cap_existing, invest_allowed(tech));
    const double capx = p.cap_existing;
    const double eta = std::sqrt(p.eta_cycle);
    const double cap_ub = capx + (capn ? p.cap_new_max : 0.0);

    std::optional<std::size_t> prev;
    for (std::size_t t = 0; t < T_; ++t) {
        const int ti = static_cast<int>(t);
        const std::string ts = std::to_string(t);
        const auto e = add_var({"E", comp, "", ti}, 0.0, cap_ub, comp);
        const auto pin = add_var({"P_in", comp, "", ti}, 0.0, kInf, comp);
        const auto pout = add_var({"P_out", comp, "", ti}, 0.0, kInf, comp);
        bus(b, ti, pin, -1.0);
        bus(b, ti, pout, 1.0);

        // E_t - eta_time E_{t-1} - dt eta_ch P_in + dt P_out / eta_dis = 0, E_{-1} = k_ini cap
        std::vector<Term> soc{{e, 1.0}, {pin, -dt_ * eta}, {pout, dt_ / eta}};
        double rhs = 0.0;
        if (prev) {
            soc.push_back({*prev, -p.eta_time});
        } else {
            if (capn) soc.push_back({*capn, -p.eta_time * p.k_ini});
            rhs = p.eta_time * p.k_ini * capx;
        }
        model_.add_constraint(comp + "_soc[" + ts + "]", std::move(soc), Sense::Equal, rhs, comp);

        auto rate_row = [&](std::size_t flow, double rate, const char* tag) {
            if (!std::isfinite(rate)) return;
            std::vector<Term> terms{{flow, 1.0}};
            if (capn) terms.push_back({*capn, -rate});
            model_.add_constraint(comp + "_" + tag + "[" + ts + "]", std::move(terms), Sense::LessEqual, rate * capx,
                                  comp);
        };
        rate_row(pin, p.c_rate_in, "in");
        rate_row(pout, p.c_rate_out, "out");
        if (capn) {
            model_.add_constraint(comp + "_cap[" + ts + "]", {{e, 1.0}, {*capn, -1.0}}, Sense::LessEqual, capx, comp);
        }
        prev = e;
    }
    std::vector<Term> terminal{{*prev, 1.0}};
    if (capn) terminal.push_back({*capn, -p.k_ini});
    model_.add_constraint(comp + "_terminal", std::move(terminal), Sense::Equal, p.k_ini * capx, comp);
}

void ModelBuilder::add_bev_block(const std::vector<BevGroup>& groups) {
    for (const auto& g : groups) {
        g.validate();
        if (g.avail.size() != T_ || g.drive.size() != T_) {
            throw BuildError("BEV group " + g.group_id + ": series length does not match horizon");
        }
        const double eta = std::sqrt(g.eta_cycle);
        const double e_min = g.k_empty * g.e_cap;
        const double e_max = g.k_full * g.e_cap;

        // Drive energy during a stretch without grid connection must fit in the SOC window.
        std::vector<std::string> offending;
        std::size_t t = 0;
        while (t < T_) {
            if (g.avail[t] != 0.0) {
                ++t;
                continue;
            }
            const std::size_t first = t;
            double energy = 0.0;
            for (; t < T_ && g.avail[t] == 0.0; ++t) energy += g.drive[t] * dt_ / eta;
            double headroom = e_max - e_min;
            if (first == 0) headroom = std::min(headroom, g.k_ini * g.e_cap - e_min);
            if (t == T_) headroom = std::min(headroom, e_max - g.k_ini * g.e_cap);
            if (energy > headroom + 1e-9) {
                std::ostringstream os;
                os << "hours " << first << "-" << (t - 1) << " need " << energy << " kWh, window " << headroom
                   << " kWh";
                offending.push_back(os.str());
            }
        }
        for (std::size_t k = 0; k < T_; ++k) {
            if (g.drive[k] > 0.0 && g.avail[k] != 0.0) {
                report_.warnings.push_back("BEV group " + g.group_id + " drives while connected at hour " +
                                           std::to_string(k));
                break;
            }
        }
        if (!offending.empty()) {
            std::string msg = "BEV group " + g.group_id + ": drive demand infeasible (";
            for (std::size_t i = 0; i < offending.size(); ++i) msg += (i ? "; " : "") + offending[i];
            throw BuildError(msg + ")");
        }

        const std::string comp = bev_component(g);
        std::optional<std::size_t> prev;
        for (std::size_t k = 0; k < T_; ++k) {
            const int ti = static_cast<int>(k);
            const std::string ts = std::to_string(k);
            const auto e = add_var({"E", comp, "", ti}, e_min, e_max, "BEV");
            const auto pin = add_var({"P_in", comp, "", ti}, 0.0, g.avail[k] * g.lambda_in * g.e_cap, "BEV");
            bus(Bus::Elec, ti, pin, -1.0);
            std::vector<Term> soc{{e, 1.0}, {pin, -dt_ * eta}};
            if (scenario_.z_v2x) {
                const auto v2x = add_var({"P_v2x", comp, "", ti}, 0.0, g.avail[k] * g.lambda_v2x * g.e_cap, "BEV");
                bus(Bus::Elec, ti, v2x, 1.0);
                soc.push_back({v2x, dt_ / eta});
            }
            double rhs = -dt_ * g.drive[k] / eta;
            if (prev) {
                soc.push_back({*prev, -1.0});
            } else {
                rhs += g.k_ini * g.e_cap;
            }
            model_.add_constraint(comp + "_soc[" + ts + "]", std::move(soc), Sense::Equal, rhs, "BEV");
            if (!scenario_.z_smart) penalty_terms_.push_back({pin, kPenaltyPerKw * static_cast<double>(k + 1)});
            prev = e;
        }
        if (prev) {
            model_.add_constraint(comp + "_terminal", {{*prev, 1.0}}, Sense::Equal, g.k_ini * g.e_cap, "BEV");
        }
    }
}

void ModelBuilder::add_emissions_and_dac() {
    if (emissions_added_) throw ContractViolation("emission block added twice");
    emissions_added_ = true;
    ce_dac_ = add_var({"CE_dac", "", "", -1}, 0.0, kInf, "costs");
    opex_terms_.push_back({*ce_dac_, context_.c_dac});
}

std::pair<ModelInstance, BuildReport> ModelBuilder::finish() {
    if (finished_) throw ContractViolation("ModelBuilder::finish called twice");
    finished_ = true;
    if (!grid_added_) throw ContractViolation("grid block is mandatory");
    if (!emissions_added_) add_emissions_and_dac();

    // Bus balances
    for (auto& [b, rows] : bus_terms_) {
        const auto& rhs = bus_rhs_[b];
        for (std::size_t t = 0; t < T_; ++t) {
            if (rows[t].empty() && rhs[t] != 0.0) {
                std::ostringstream os;
                os << "no supplier for " << to_string(b) << " demand of " << rhs[t] << " kW at hour " << t;
                throw BuildError(os.str());
            }
            model_.add_constraint(std::string(to_string(b)) + "[" + std::to_string(t) + "]", std::move(rows[t]),
                                  Sense::Equal, rhs[t], "balance");
        }
    }

    // Cost and emission accounting
    const auto tac = add_var({"TAC", "", "", -1}, -kInf, kInf, "costs");
    const auto capex = add_var({"CapEx", "", "", -1}, -kInf, kInf, "costs");
    const auto opex = add_var({"OpEx", "", "", -1}, -kInf, kInf, "costs");
    const auto ce = add_var({"CE", "", "", -1}, -kInf, kInf, "costs");
    const auto penalty = add_var({"X_penalty", "", "", -1}, 0.0, kInf, "costs");

    model_.add_constraint("tac_def", {{tac, 1.0}, {capex, -1.0}, {opex, -1.0}}, Sense::Equal, 0.0, "costs");
    auto define = [&](const std::string& name, std::size_t lhs, const std::vector<Term>& parts,
                      std::vector<Term> extra = {}) {
        std::vector<Term> row{{lhs, 1.0}};
        for (const auto& p : parts) row.push_back({p.var, -p.coef});
        for (const auto& p : extra) row.push_back(p);
        model_.add_constraint(name, std::move(row), Sense::Equal, 0.0, "costs");
    };
    define("capex_def", capex, capex_terms_);
    define("opex_def", opex, opex_terms_);
    define("ce_def", ce, emission_terms_, {{*ce_dac_, 1.0}});
    define("penalty_def", penalty, penalty_terms_);
    if (scenario_.decarbonize) model_.add_constraint("net_zero", {{ce, 1.0}}, Sense::Equal, 0.0, "costs");

    model_.add_objective(tac, 1.0);
    model_.add_objective(penalty, 1.0);
    model_.validate();

    report_.variables_by_block.clear();
    report_.constraints_by_block.clear();
    for (const auto& v : model_.variables()) ++report_.variables_by_block[v.block];
    for (const auto& c : model_.constraints()) ++report_.constraints_by_block[c.block];
    report_.num_variables = model_.num_variables();
    report_.num_constraints = model_.num_constraints();
    report_.num_binaries = model_.num_binaries();
    return {std::move(model_), std::move(report_)};
}

// -----------------------------------------------------------------------------
// build_model
// -----------------------------------------------------------------------------

std::pair<ModelInstance, BuildReport> build_model(const Dataset& dataset, const ScenarioConfig& scenario,
                                                  const ContextConfig& context, const BuildOptions& options) {
    dataset.validate();
    ModelBuilder b(dataset, scenario, context);
    const auto& cat = dataset.catalog;
    auto present = [&](TechId id, double capx) {
        if (!cat.techs.contains(id)) return false;
        const auto& p = cat.at(id);
        return capx > 0.0 || (b.invest_allowed(id) && p.cap_new_max > 0.0);
    };

    b.add_grid_block();
    if (!scenario.decarbonize) b.add_ng_block();

    for (TechId id : {TechId::CHP, TechId::HOB, TechId::P2H, TechId::Elc, TechId::FC}) {
        if (!present(id, cat.techs.contains(id) ? cat.at(id).cap_existing : 0.0)) continue;
        if ((id == TechId::CHP || id == TechId::HOB) && scenario.decarbonize) continue;
        b.add_conversion_block(cat.at(id));
    }

    if (cat.techs.contains(TechId::HP)) {
        const double capx = scenario.reference_cooling_machine ? cat.reference_cooling_machine_kw
                                                               : cat.at(TechId::HP).cap_existing;
        const bool invest = !scenario.reference_cooling_machine && b.invest_allowed(TechId::HP);
        if (capx > 0.0 || (invest && cat.at(TechId::HP).cap_new_max > 0.0)) {
            b.add_heat_pump_block(dataset.heat_pump, scenario.hp_modes, capx, invest);
        }
    }

    if (present(TechId::PV, cat.techs.contains(TechId::PV) ? cat.at(TechId::PV).cap_existing : 0.0)) {
        b.add_vres_block(TechId::PV, dataset.pv_profile);
    }
    if (present(TechId::WT, cat.techs.contains(TechId::WT) ? cat.at(TechId::WT).cap_existing : 0.0)) {
        b.add_vres_block(TechId::WT, dataset.wt_profile);
    }

    if (present(TechId::BES, cat.techs.contains(TechId::BES) ? cat.at(TechId::BES).cap_existing : 0.0)) {
        b.add_storage_block(TechId::BES);
    }
    if (present(TechId::TES, cat.techs.contains(TechId::TES) ? cat.at(TechId::TES).cap_existing : 0.0)) {
        for (HeatLevelId lvl : {HeatLevelId::COOL_7_12, HeatLevelId::SPACE_75_55, HeatLevelId::PROC_95_75}) {
            b.add_storage_block(TechId::TES, lvl);
        }
    }
    if (present(TechId::H2S, cat.techs.contains(TechId::H2S) ? cat.at(TechId::H2S).cap_existing : 0.0)) {
        b.add_storage_block(TechId::H2S);
    }

    b.add_bev_block(dataset.bev_groups);
    b.add_emissions_and_dac();

    auto [model, report] = b.finish();
    if (scenario.chp_fixed_to_ref) {
        if (!options.ref_chp_dispatch) {
            throw BuildError("scenario " + scenario.name + " pins the CHP but no reference solution was given");
        }
        fix_chp_to_reference(model, *options.ref_chp_dispatch);
        report.constraints_by_block["chp_fix"] = options.ref_chp_dispatch->size();
        report.num_constraints = model.num_constraints();
    }
    return {std::move(model), std::move(report)};
}

void fix_chp_to_reference(ModelInstance& model, const TimeSeries& ref_dispatch) {
    const auto outputs = model.select("P_out", "CHP");
    std::vector<std::pair<int, std::size_t>> el;
    for (const auto& [key, idx] : outputs) {
        if (key.mode == "el") el.emplace_back(key.t, idx);
    }
    if (el.empty()) throw BuildError("fix_chp_to_reference: model has no CHP");
    if (el.size() != ref_dispatch.size()) {
        throw BuildError("fix_chp_to_reference: reference dispatch has " + std::to_string(ref_dispatch.size()) +
                         " hours, model has " + std::to_string(el.size()));
    }
    std::sort(el.begin(), el.end());
    for (const auto& [t, idx] : el) {
        const double v = ref_dispatch[static_cast<std::size_t>(t)];
        if (v < 0.0) throw BuildError("fix_chp_to_reference: negative reference dispatch");
        model.add_constraint("chp_fix[" + std::to_string(t) + "]", {{idx, 1.0}}, Sense::Equal, v, "chp_fix");
    }
}

}  // namespace flexopt
