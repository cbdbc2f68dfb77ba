#pragma once

// Shared domain types of the multi-energy-system model.
//
// Fixed unit system: power in kW, energy in kWh, prices in EUR/MWh,
// emission factors in t_CO2eq/MWh, temperatures in degC, time in hours.

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace flexopt {

// -----------------------------------------------------------------------------
// Errors
// -----------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}
    /// Machine-readable error category, e.g. "invalid-parameter".
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

struct InvalidParameter : Error {
    explicit InvalidParameter(const std::string& m) : Error("invalid-parameter", m) {}
};
struct ValidationError : Error {
    explicit ValidationError(const std::string& m) : Error("validation", m) {}
};
struct DegenerateTemperature : Error {
    explicit DegenerateTemperature(const std::string& m) : Error("degenerate-temperature", m) {}
};
struct BuildError : Error {
    explicit BuildError(const std::string& m) : Error("build", m) {}
};
struct ContractViolation : Error {
    explicit ContractViolation(const std::string& m) : Error("contract-violation", m) {}
};
struct UndefinedMetric : Error {
    explicit UndefinedMetric(const std::string& m) : Error("undefined-metric", m) {}
};
struct SolverError : Error {
    explicit SolverError(const std::string& m) : Error("solver", m) {}
};
struct IoError : Error {
    explicit IoError(const std::string& m) : Error("io", m) {}
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// -----------------------------------------------------------------------------
// Time series
// -----------------------------------------------------------------------------

/// Hourly (or dt-spaced) series on a flat index 0..T-1.
class TimeSeries {
public:
    TimeSeries() = default;
    explicit TimeSeries(std::vector<double> values, double dt_hours = 1.0,
                        std::string start_label = {});

    std::size_t size() const noexcept { return values_.size(); }
    double dt_hours() const noexcept { return dt_hours_; }
    const std::string& start_label() const noexcept { return start_label_; }
    const std::vector<double>& values() const noexcept { return values_; }
    double operator[](std::size_t t) const { return values_[t]; }

    /// Compensated (Neumaier) sum of the values.
    double sum() const;
    double mean() const;
    /// Population standard deviation.
    double stddev() const;
    double min() const;
    double max() const;
    /// sum_t w_t x_t / sum_t w_t; throws UndefinedMetric on zero weight.
    double weighted_mean(const std::vector<double>& weights) const;
    /// Sub-series [first, first + count).
    TimeSeries window(std::size_t first, std::size_t count) const;

    friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

private:
    std::vector<double> values_;
    double dt_hours_ = 1.0;
    std::string start_label_;
};

/// Neumaier-compensated sum.
double compensated_sum(const std::vector<double>& xs);

// -----------------------------------------------------------------------------
// Technologies
// -----------------------------------------------------------------------------

enum class TechId { CHP, Elc, FC, HOB, HP, P2H, PV, WT, BES, TES, H2S, BEV };

enum class BaseUnit { kW_el, kW_th, kW_p, kWh_el, kWh_th, kWh_H2 };

std::string_view to_string(TechId id);
TechId tech_from_string(std::string_view s);
std::string_view to_string(BaseUnit u);

enum class HeatLevelId { COOL_7_12, SPACE_75_55, PROC_95_75 };

std::string_view to_string(HeatLevelId id);
HeatLevelId heat_level_from_string(std::string_view s);

/// Output carriers a conversion technology can produce.
enum class Carrier { Electricity, Heat, Hydrogen };

struct TechParams {
    TechId tech_id = TechId::PV;
    double c_inv = 0.0;            ///< EUR per base unit
    BaseUnit base_unit = BaseUnit::kW_el;
    double rmi_frac = 0.0;         ///< share of investment per year
    int life_years = 1;
    /// Output carrier -> conversion efficiency (output per unit input).
    std::map<Carrier, double> efficiencies;
    double c_rate_in = kInf;       ///< kW per kWh; inf means unconstrained
    double c_rate_out = kInf;
    double eta_cycle = 1.0;
    double eta_time = 1.0;         ///< retained share per hour
    double k_ini = 0.5;            ///< initial and terminal SOC fraction (storages)
    double cap_existing = 0.0;
    double cap_new_max = kInf;

    void validate() const;
};

/// Technology parameters keyed by technology; TES carries one entry per level.
struct TechCatalog {
    std::map<TechId, TechParams> techs;
    /// Existing hot-side capacity of the cooling machine used only by the reference scenario.
    double reference_cooling_machine_kw = 0.0;
    double discount_rate = 0.10;

    const TechParams& at(TechId id) const;
    void validate() const;
};

struct GridParams {
    double p_buy_max = 20'000.0;   ///< kW
    double p_sell_max = 20'000.0;  ///< kW
    double c_addon = 62.28;        ///< EUR/MWh
    double c_peak_fee = 70.0;      ///< EUR/kW/yr

    void validate() const;
};

struct FuelParams {
    double c_ng = 43.0;            ///< EUR/MWh
    double cef_ng = 0.240;         ///< t/MWh
    double c_carbon_tax = 55.0;    ///< EUR/t

    void validate() const;
};

/// A thermal level (or the well) described by flow/return temperatures.
struct HeatLevel {
    std::string name;
    double flow_c = 0.0;
    double return_c = 0.0;
    double exchanger_dt = 5.0;

    void validate() const;
};

HeatLevel standard_level(HeatLevelId id);
/// Ground-water well used as free source/sink (constant 10 degC).
HeatLevel well_level();

/// One heat-pump operating mode (source -> sink) with its constant COP.
struct HpMode {
    std::string source;
    std::string sink;
    double cop = 0.0;
};

struct HPParams {
    double eta_carnot = 0.5;
    int n_modes = 2;
    std::vector<HeatLevel> sources;
    std::vector<HeatLevel> sinks;

    void validate() const;
};

struct BevGroup {
    std::string group_id;
    double e_cap = 0.0;            ///< kWh
    double k_ini = 0.5;
    double k_empty = 0.15;
    double k_full = 0.85;
    double lambda_in = 0.7;
    double lambda_v2x = 0.7;
    double eta_cycle = 0.95;
    TimeSeries avail;              ///< 0/1 per hour
    TimeSeries drive;              ///< kW

    void validate() const;
};

// -----------------------------------------------------------------------------
// Study cell definition
// -----------------------------------------------------------------------------

/// Which heat-pump source/sink combinations are admissible.
enum class HpModePolicy {
    CoolingOnly,   ///< cold demand -> well only
    NoColdToHeat,  ///< everything except cold demand -> heat demand
    All,
};

std::string_view to_string(HpModePolicy p);
HpModePolicy hp_mode_policy_from_string(std::string_view s);

struct ScenarioConfig {
    std::string name;
    bool allow_conversion_invest = false;
    bool use_existing_flex = false;
    bool allow_storage_invest = false;
    bool decarbonize = false;
    bool z_smart = false;
    bool z_v2x = false;
    bool chp_fixed_to_ref = false;
    HpModePolicy hp_modes = HpModePolicy::CoolingOnly;
    /// Uses the existing cooling machine as the only heat pump capacity.
    bool reference_cooling_machine = false;

    void validate() const;
};

struct ContextConfig {
    std::string name;
    double c_dac = 222.0;          ///< EUR/t
    TimeSeries price_series;       ///< EUR/MWh

    void validate() const;
};

// -----------------------------------------------------------------------------
// Operations
// -----------------------------------------------------------------------------

/// r(1+r)^n / ((1+r)^n - 1).
double annuity_factor(double r, int n);

/// Smallest admissible gap between condensation and evaporation temperature (K).
inline constexpr double kMinTemperatureGap = 1.0;

/// Carnot-based COP for heating `sink` from `source`; condensation and
/// evaporation temperatures are offset by the exchanger temperature differences.
double carnot_cop(const HeatLevel& sink, const HeatLevel& source, double eta_carnot);

/// Enumerates admissible modes (source != sink, gap >= kMinTemperatureGap).
/// Excluded pairs are reported through `excluded` when given.
std::vector<HpMode> enumerate_hp_modes(const HPParams& hp,
                                       std::vector<std::string>* excluded = nullptr);

}  // namespace flexopt
