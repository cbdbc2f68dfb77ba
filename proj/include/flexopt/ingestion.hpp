#pragma once

// Exogenous data: loading, validation, preprocessing and the synthetic
// case-study generator.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flexopt/core_types.hpp"

namespace flexopt {

/// All exogenous inputs of one study.
struct Dataset {
    TimeSeries prices;                          ///< EUR/MWh
    TimeSeries cefs;                            ///< t/MWh
    TimeSeries edem;                            ///< kW, inflexible electricity demand
    std::map<HeatLevelId, TimeSeries> heat_dem; ///< kW per level (cooling included)
    TimeSeries pv_profile;                      ///< kW per kW_p
    TimeSeries wt_profile;                      ///< kW per kW_p
    std::vector<BevGroup> bev_groups;
    GridParams grid;
    FuelParams fuel;
    TechCatalog catalog;
    HPParams heat_pump;

    std::size_t horizon() const noexcept { return prices.size(); }
    double dt_hours() const noexcept { return prices.dt_hours(); }
    /// Throws ValidationError when series disagree in length/dt or leave their ranges.
    void validate() const;
};

// -----------------------------------------------------------------------------
// CSV time series: header "t,value", integer hour index, '.' decimal point.
// -----------------------------------------------------------------------------

struct ColumnSpec {
    std::string column = "value";
    std::optional<std::size_t> horizon;  ///< declared horizon; mismatch is an error
    double dt_hours = 1.0;
};

TimeSeries load_timeseries(const std::filesystem::path& path, const ColumnSpec& spec = {});
void write_timeseries(const std::filesystem::path& path, const TimeSeries& series);

// -----------------------------------------------------------------------------
// Preprocessing
// -----------------------------------------------------------------------------

struct InflexibleDemand {
    TimeSeries demand;
    std::size_t clamped = 0;  ///< hours where the raw reconstruction was negative
};

/// Grid purchase + PV own-consumption - BEV drive - cooling machine, clamped at 0.
InflexibleDemand derive_inflexible_demand(const TimeSeries& eg_buy_hist, const TimeSeries& pv_oc_hist,
                                          const TimeSeries& bev_drive_hist,
                                          const TimeSeries& cm_approx_hist);

struct BevBattery {
    double e_cap = 0.0;      ///< kWh
    std::string pattern_id;
    TimeSeries drive;        ///< kW drawn by this battery for driving
};

/// Merges batteries sharing an availability pattern into one group each.
/// Groups appear in order of first occurrence of their pattern.
std::vector<BevGroup> aggregate_bev_fleet(const std::vector<BevBattery>& batteries,
                                          const std::map<std::string, TimeSeries>& patterns,
                                          const BevGroup& defaults = {});

/// Affine transform a*x + b (a > 0) matching the target mean and standard deviation.
TimeSeries scale_prices(const TimeSeries& series, double target_mean, double target_std);

// -----------------------------------------------------------------------------
// Synthetic case-study data
// -----------------------------------------------------------------------------

/// Knobs of the synthetic generator; defaults ship as data/synth_params.json.
struct SynthParams {
    int start_day = 152;               ///< day of year of hour 0 (0-based)
    double price_mean = 40.0;          ///< EUR/MWh
    double price_std = 13.0;
    double price_daily_spread = 25.0;  ///< peak-to-trough amplitude of the daily shape
    double cef_mean = 0.42;            ///< t/MWh
    double cef_price_coupling = 0.6;   ///< correlation weight of CEF with price shape
    double edem_base = 700.0;          ///< kW
    double edem_shift = 550.0;         ///< extra kW during production shifts
    double heat_proc_base = 260.0;
    double heat_space_base = 120.0;
    double cool_base = 280.0;
    double cool_summer = 260.0;
    double pv_peak = 0.75;             ///< kW/kW_p at clear-sky summer noon
    double wt_mean = 0.33;
    double bev_battery_kwh = 81.1;
    int bev_batteries_per_group = 12;
    double bev_drive_kw_per_battery = 4.6;

    static SynthParams from_json_file(const std::filesystem::path& path);
    void to_json_file(const std::filesystem::path& path) const;
};

/// PV output is exactly zero for hour-of-day in [0, kPvNightEnd) or [kPvNightStart, 24).
inline constexpr int kPvNightEnd = 5;
inline constexpr int kPvNightStart = 21;

/// Default technology catalog, grid and fuel constants of the case study.
TechCatalog default_catalog();
HPParams default_heat_pump();

/// Deterministic per (seed, horizon, params). Horizon must be in [24, 8760].
Dataset generate_synthetic_dataset(std::uint64_t seed, std::size_t horizon_hours,
                                   const SynthParams& params = {});

// -----------------------------------------------------------------------------
// Dataset bundle: directory with dataset.json manifest + one CSV per series.
// -----------------------------------------------------------------------------

void save_bundle(const Dataset& dataset, const std::filesystem::path& dir);
Dataset load_bundle(const std::filesystem::path& dir);

}  // namespace flexopt
