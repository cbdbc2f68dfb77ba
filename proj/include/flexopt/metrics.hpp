#pragma once

// Demand-response metrics over price, CEF and grid-purchase series.
// Feed-in is not part of any metric.

#include <cstddef>
#include <optional>

#include "flexopt/core_types.hpp"

namespace flexopt {

/// Undefined entries (e.g. no purchase in the window) stay empty.
struct MetricSet {
    std::optional<double> ewap;      ///< EUR/MWh
    std::optional<double> twap;      ///< EUR/MWh
    std::optional<double> ewacef;    ///< t/MWh
    std::optional<double> twacef;    ///< t/MWh
    std::optional<double> pi_rate;
    std::optional<double> eps_rate;
    std::optional<double> omega;
    std::optional<double> tcer;      ///< EUR/t
    std::optional<double> ecer;      ///< EUR/t
    double peak_buy = 0.0;           ///< kW
    double volume_buy = 0.0;         ///< MWh
};

struct PairMetrics {
    double ecer_pair = 0.0;          ///< EUR/t
    double omega_pair = 0.0;
    bool defined = false;
};

/// Denominators below this are treated as zero in pair metrics.
inline constexpr double kPairTolerance = 1e-12;

double ewap(const TimeSeries& prices, const TimeSeries& purchase, double dt = 1.0);
double ewacef(const TimeSeries& cefs, const TimeSeries& purchase, double dt = 1.0);
double twap(const TimeSeries& prices, double dt = 1.0);
double twacef(const TimeSeries& cefs, double dt = 1.0);
double pi_rate(double ewap, double twap);
double eps_rate(double ewacef, double twacef);
double tcer(double twap, double twacef);
double ecer(double ewap, double ewacef);
double omega(double ecer, double tcer);

PairMetrics pair_metrics(const MetricSet& base, const MetricSet& s);

/// TAC of the net-zero variant minus TAC of the plain variant.
double decarbonization_cost(double tac_plain, double tac_decarb);

/// All metrics of one purchase profile. `volume_scale` multiplies the
/// purchased MWh (e.g. to annualise a short horizon).
MetricSet compute_metrics(const TimeSeries& prices, const TimeSeries& cefs, const TimeSeries& purchase,
                          double dt = 1.0, double volume_scale = 1.0);
/// Same on hours [first, first + count).
MetricSet compute_metrics(const TimeSeries& prices, const TimeSeries& cefs, const TimeSeries& purchase,
                          std::size_t first, std::size_t count, double dt = 1.0, double volume_scale = 1.0);

}  // namespace flexopt
