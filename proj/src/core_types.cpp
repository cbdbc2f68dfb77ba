#include "flexopt/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace flexopt {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw InvalidParameter(what);
}

bool is_fraction(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace

// -----------------------------------------------------------------------------
// TimeSeries
// -----------------------------------------------------------------------------

TimeSeries::TimeSeries(std::vector<double> values, double dt_hours, std::string start_label)
    : values_(std::move(values)), dt_hours_(dt_hours), start_label_(std::move(start_label)) {
    if (values_.empty()) throw ValidationError("time series must contain at least one value");
    if (!(dt_hours_ > 0.0)) throw ValidationError("time series dt_hours must be positive");
    for (std::size_t t = 0; t < values_.size(); ++t) {
        if (!std::isfinite(values_[t])) {
            throw ValidationError("missing value at row " + std::to_string(t));
        }
    }
}

double compensated_sum(const std::vector<double>& xs) {
    double sum = 0.0;
    double c = 0.0;
    for (double x : xs) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    return sum + c;
}

double TimeSeries::sum() const { return compensated_sum(values_); }

double TimeSeries::mean() const {
    if (values_.empty()) throw UndefinedMetric("mean of empty series");
    return sum() / static_cast<double>(values_.size());
}

double TimeSeries::stddev() const {
    const double m = mean();
    std::vector<double> sq;
    sq.reserve(values_.size());
    for (double x : values_) sq.push_back((x - m) * (x - m));
    return std::sqrt(compensated_sum(sq) / static_cast<double>(values_.size()));
}

double TimeSeries::min() const { return *std::min_element(values_.begin(), values_.end()); }
double TimeSeries::max() const { return *std::max_element(values_.begin(), values_.end()); }

double TimeSeries::weighted_mean(const std::vector<double>& weights) const {
    if (weights.size() != values_.size()) {
        throw ValidationError("weighted_mean: weight length mismatch");
    }
    std::vector<double> num(values_.size());
    for (std::size_t t = 0; t < values_.size(); ++t) num[t] = values_[t] * weights[t];
    const double den = compensated_sum(weights);
    if (den == 0.0) throw UndefinedMetric("weighted_mean: total weight is zero");
    return compensated_sum(num) / den;
}

TimeSeries TimeSeries::window(std::size_t first, std::size_t count) const {
    if (count == 0 || first + count > values_.size()) {
        throw ValidationError("window out of range");
    }
    return TimeSeries(std::vector<double>(values_.begin() + static_cast<std::ptrdiff_t>(first),
                                          values_.begin() + static_cast<std::ptrdiff_t>(first + count)),
                      dt_hours_, start_label_);
}

// -----------------------------------------------------------------------------
// Enum names
// -----------------------------------------------------------------------------

namespace {

constexpr std::pair<TechId, std::string_view> kTechNames[] = {
    {TechId::CHP, "CHP"}, {TechId::Elc, "Elc"}, {TechId::FC, "FC"},   {TechId::HOB, "HOB"},
    {TechId::HP, "HP"},   {TechId::P2H, "P2H"}, {TechId::PV, "PV"},   {TechId::WT, "WT"},
    {TechId::BES, "BES"}, {TechId::TES, "TES"}, {TechId::H2S, "H2S"}, {TechId::BEV, "BEV"},
};

constexpr std::pair<HeatLevelId, std::string_view> kLevelNames[] = {
    {HeatLevelId::COOL_7_12, "COOL_7_12"},
    {HeatLevelId::SPACE_75_55, "SPACE_75_55"},
    {HeatLevelId::PROC_95_75, "PROC_95_75"},
};

constexpr std::pair<HpModePolicy, std::string_view> kPolicyNames[] = {
    {HpModePolicy::CoolingOnly, "cooling_only"},
    {HpModePolicy::NoColdToHeat, "no_cold_to_heat"},
    {HpModePolicy::All, "all"},
};

}  // namespace

std::string_view to_string(TechId id) {
    for (const auto& [k, v] : kTechNames)
        if (k == id) return v;
    return "?";
}

TechId tech_from_string(std::string_view s) {
    for (const auto& [k, v] : kTechNames)
        if (v == s) return k;
    throw InvalidParameter("unknown technology id '" + std::string(s) + "'");
}

std::string_view to_string(BaseUnit u) {
    switch (u) {
        case BaseUnit::kW_el: return "kW_el";
        case BaseUnit::kW_th: return "kW_th";
        case BaseUnit::kW_p: return "kW_p";
        case BaseUnit::kWh_el: return "kWh_el";
        case BaseUnit::kWh_th: return "kWh_th";
        case BaseUnit::kWh_H2: return "kWh_H2";
    }
    return "?";
}

std::string_view to_string(HeatLevelId id) {
    for (const auto& [k, v] : kLevelNames)
        if (k == id) return v;
    return "?";
}

HeatLevelId heat_level_from_string(std::string_view s) {
    for (const auto& [k, v] : kLevelNames)
        if (v == s) return k;
    throw InvalidParameter("unknown heat level '" + std::string(s) + "'");
}

std::string_view to_string(HpModePolicy p) {
    for (const auto& [k, v] : kPolicyNames)
        if (k == p) return v;
    return "?";
}

HpModePolicy hp_mode_policy_from_string(std::string_view s) {
    for (const auto& [k, v] : kPolicyNames)
        if (v == s) return k;
    throw InvalidParameter("unknown heat pump mode policy '" + std::string(s) + "'");
}

// -----------------------------------------------------------------------------
// Validation
// -----------------------------------------------------------------------------

void TechParams::validate() const {
    const std::string name(to_string(tech_id));
    require(c_inv >= 0.0, name + ": c_inv must be >= 0");
    require(is_fraction(rmi_frac), name + ": rmi_frac must be in [0,1]");
    require(life_years >= 1, name + ": life_years must be >= 1");
    for (const auto& [carrier, eta] : efficiencies) {
        require(is_fraction(eta), name + ": efficiencies must be in [0,1]");
    }
    require(is_fraction(eta_cycle) && eta_cycle > 0.0, name + ": eta_cycle must be in (0,1]");
    require(is_fraction(eta_time) && eta_time > 0.0, name + ": eta_time must be in (0,1]");
    require(is_fraction(k_ini), name + ": k_ini must be in [0,1]");
    require(c_rate_in >= 0.0 && c_rate_out >= 0.0, name + ": C-rates must be >= 0");
    require(cap_existing >= 0.0, name + ": cap_existing must be >= 0");
    require(cap_new_max >= 0.0, name + ": cap_new_max must be >= 0");
}

const TechParams& TechCatalog::at(TechId id) const {
    auto it = techs.find(id);
    if (it == techs.end()) {
        throw InvalidParameter("technology " + std::string(to_string(id)) + " missing from catalog");
    }
    return it->second;
}

void TechCatalog::validate() const {
    for (const auto& [id, p] : techs) {
        if (p.tech_id != id) throw InvalidParameter("catalog key/tech_id mismatch");
        p.validate();
    }
    require(discount_rate > 0.0, "discount_rate must be > 0");
    require(reference_cooling_machine_kw >= 0.0, "reference cooling machine capacity must be >= 0");
}

void GridParams::validate() const {
    require(p_buy_max >= 0 && p_sell_max >= 0 && c_addon >= 0 && c_peak_fee >= 0,
            "grid parameters must be >= 0");
}

void FuelParams::validate() const {
    require(c_ng >= 0 && cef_ng >= 0 && c_carbon_tax >= 0, "fuel parameters must be >= 0");
}

void HeatLevel::validate() const {
    require(flow_c != return_c, "heat level " + name + ": flow and return temperature must differ");
    require(exchanger_dt >= 0.0, "heat level " + name + ": exchanger_dt must be >= 0");
}

HeatLevel standard_level(HeatLevelId id) {
    switch (id) {
        case HeatLevelId::COOL_7_12: return {"COOL_7_12", 7.0, 12.0, 5.0};
        case HeatLevelId::SPACE_75_55: return {"SPACE_75_55", 75.0, 55.0, 5.0};
        case HeatLevelId::PROC_95_75: return {"PROC_95_75", 95.0, 75.0, 5.0};
    }
    throw InvalidParameter("unknown heat level");
}

HeatLevel well_level() { return {"WELL", 10.0, 15.0, 5.0}; }

void HPParams::validate() const {
    require(eta_carnot > 0.0 && eta_carnot <= 1.0, "eta_carnot must be in (0,1]");
    require(n_modes >= 1, "n_modes must be >= 1");
    for (const auto& l : sources) l.validate();
    for (const auto& l : sinks) l.validate();
}

void BevGroup::validate() const {
    require(e_cap >= 0.0, "BEV group " + group_id + ": e_cap must be >= 0");
    require(0.0 <= k_empty && k_empty <= k_ini && k_ini <= k_full && k_full <= 1.0,
            "BEV group " + group_id + ": need 0 <= k_empty <= k_ini <= k_full <= 1");
    require(lambda_in >= 0.0 && lambda_v2x >= 0.0, "BEV group " + group_id + ": C-rates must be >= 0");
    require(eta_cycle > 0.0 && eta_cycle <= 1.0, "BEV group " + group_id + ": eta_cycle in (0,1]");
    if (avail.size() != drive.size()) {
        throw ValidationError("BEV group " + group_id + ": avail/drive length mismatch");
    }
    for (double a : avail.values()) {
        if (a != 0.0 && a != 1.0) throw ValidationError("BEV group " + group_id + ": avail must be 0/1");
    }
    for (double d : drive.values()) {
        if (d < 0.0) throw ValidationError("BEV group " + group_id + ": drive must be >= 0");
    }
}

void ScenarioConfig::validate() const {
    require(!name.empty(), "scenario name must not be empty");
    if (decarbonize && chp_fixed_to_ref) {
        throw InvalidParameter("scenario " + name + ": decarbonize bans natural gas, CHP cannot be fixed");
    }
}

void ContextConfig::validate() const {
    require(c_dac > 0.0, "context " + name + ": c_dac must be > 0");
    require(price_series.size() >= 1, "context " + name + ": empty price series");
}

// -----------------------------------------------------------------------------
// Operations
// -----------------------------------------------------------------------------

double annuity_factor(double r, int n) {
    if (!(r > 0.0)) throw InvalidParameter("annuity_factor: discount rate must be > 0");
    if (n < 1) throw InvalidParameter("annuity_factor: economic life must be >= 1 year");
    const double q = std::pow(1.0 + r, n);
    return r * q / (q - 1.0);
}

double carnot_cop(const HeatLevel& sink, const HeatLevel& source, double eta_carnot) {
    if (!(eta_carnot > 0.0 && eta_carnot <= 1.0)) {
        throw InvalidParameter("carnot_cop: eta_carnot must be in (0,1]");
    }
    const double cond = sink.flow_c + sink.exchanger_dt;
    const double eva = source.flow_c - source.exchanger_dt;
    if (cond - eva < kMinTemperatureGap) {
        std::ostringstream os;
        os << "carnot_cop: condensation " << cond << " degC not above evaporation " << eva
           << " degC by at least " << kMinTemperatureGap << " K (" << source.name << " -> "
           << sink.name << ")";
        throw DegenerateTemperature(os.str());
    }
    return eta_carnot * (cond + 273.15) / (cond - eva);
}

std::vector<HpMode> enumerate_hp_modes(const HPParams& hp, std::vector<std::string>* excluded) {
    hp.validate();
    std::vector<HpMode> modes;
    for (const auto& src : hp.sources) {
        for (const auto& snk : hp.sinks) {
            if (src.name == snk.name) {
                if (excluded) excluded->push_back(src.name + "->" + snk.name + " (same reservoir)");
                continue;
            }
            try {
                modes.push_back({src.name, snk.name, carnot_cop(snk, src, hp.eta_carnot)});
            } catch (const DegenerateTemperature& e) {
                if (excluded) excluded->push_back(src.name + "->" + snk.name + " (" + e.what() + ")");
            }
        }
    }
    return modes;
}

}  // namespace flexopt
