#include "flexopt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace flexopt {

namespace {

void check_pair(const TimeSeries& signal, const TimeSeries& purchase, const char* what) {
    if (signal.size() != purchase.size()) {
        throw InvalidParameter(std::string(what) + ": signal has " + std::to_string(signal.size()) +
                               " entries, purchase " + std::to_string(purchase.size()));
    }
    if (signal.size() == 0) throw InvalidParameter(std::string(what) + ": empty window");
    for (double p : purchase.values()) {
        if (p < 0.0) throw InvalidParameter(std::string(what) + ": negative purchase");
    }
}

void check_dt(double dt) {
    if (!(dt > 0.0)) throw InvalidParameter("dt must be > 0");
}

double energy_weighted(const TimeSeries& signal, const TimeSeries& purchase, double dt, const char* what) {
    check_pair(signal, purchase, what);
    check_dt(dt);
    std::vector<double> num, den;
    num.reserve(signal.size());
    den.reserve(signal.size());
    for (std::size_t t = 0; t < signal.size(); ++t) {
        num.push_back(signal[t] * purchase[t] * dt);
        den.push_back(purchase[t] * dt);
    }
    const double d = compensated_sum(den);
    if (!(d > 0.0)) throw UndefinedMetric(std::string(what) + ": no purchased energy in window");
    return compensated_sum(num) / d;
}

double ratio(double num, double den, const char* what) {
    if (den == 0.0) throw UndefinedMetric(std::string(what) + ": zero denominator");
    return num / den;
}

}  // namespace

double ewap(const TimeSeries& prices, const TimeSeries& purchase, double dt) {
    return energy_weighted(prices, purchase, dt, "ewap");
}

double ewacef(const TimeSeries& cefs, const TimeSeries& purchase, double dt) {
    return energy_weighted(cefs, purchase, dt, "ewacef");
}

double twap(const TimeSeries& prices, double dt) {
    check_dt(dt);
    if (prices.size() == 0) throw InvalidParameter("twap: empty window");
    return prices.mean();
}

double twacef(const TimeSeries& cefs, double dt) {
    check_dt(dt);
    if (cefs.size() == 0) throw InvalidParameter("twacef: empty window");
    return cefs.mean();
}

double pi_rate(double ewap_v, double twap_v) { return ratio(ewap_v, twap_v, "pi_rate"); }
double eps_rate(double ewacef_v, double twacef_v) { return ratio(ewacef_v, twacef_v, "eps_rate"); }
double tcer(double twap_v, double twacef_v) { return ratio(twap_v, twacef_v, "tcer"); }
double ecer(double ewap_v, double ewacef_v) { return ratio(ewap_v, ewacef_v, "ecer"); }
double omega(double ecer_v, double tcer_v) { return ratio(ecer_v, tcer_v, "omega"); }

PairMetrics pair_metrics(const MetricSet& base, const MetricSet& s) {
    PairMetrics p;
    if (!base.ewap || !s.ewap || !base.ewacef || !s.ewacef || !base.pi_rate || !s.pi_rate || !base.eps_rate ||
        !s.eps_rate) {
        return p;
    }
    const double d_cef = *base.ewacef - *s.ewacef;
    const double d_eps = *s.eps_rate - *base.eps_rate;
    if (std::abs(d_cef) < kPairTolerance || std::abs(d_eps) < kPairTolerance) return p;
    p.ecer_pair = (*base.ewap - *s.ewap) / d_cef;
    p.omega_pair = (*s.pi_rate - *base.pi_rate) / d_eps;
    p.defined = true;
    return p;
}

double decarbonization_cost(double tac_plain, double tac_decarb) { return tac_decarb - tac_plain; }

MetricSet compute_metrics(const TimeSeries& prices, const TimeSeries& cefs, const TimeSeries& purchase, double dt,
                          double volume_scale) {
    check_pair(prices, purchase, "metrics");
    check_pair(cefs, purchase, "metrics");
    check_dt(dt);
    MetricSet m;
    auto attempt = [](auto&& f) -> std::optional<double> {
        try {
            return f();
        } catch (const UndefinedMetric&) {
            return std::nullopt;
        }
    };
    m.twap = twap(prices, dt);
    m.twacef = twacef(cefs, dt);
    m.ewap = attempt([&] { return ewap(prices, purchase, dt); });
    m.ewacef = attempt([&] { return ewacef(cefs, purchase, dt); });
    if (m.ewap) m.pi_rate = attempt([&] { return pi_rate(*m.ewap, *m.twap); });
    if (m.ewacef) m.eps_rate = attempt([&] { return eps_rate(*m.ewacef, *m.twacef); });
    m.tcer = attempt([&] { return tcer(*m.twap, *m.twacef); });
    if (m.ewap && m.ewacef) m.ecer = attempt([&] { return ecer(*m.ewap, *m.ewacef); });
    if (m.ecer && m.tcer) m.omega = attempt([&] { return omega(*m.ecer, *m.tcer); });
    m.peak_buy = purchase.max();
    m.volume_buy = purchase.sum() * dt * 1e-3 * volume_scale;
    return m;
}

MetricSet compute_metrics(const TimeSeries& prices, const TimeSeries& cefs, const TimeSeries& purchase,
                          std::size_t first, std::size_t count, double dt, double volume_scale) {
    return compute_metrics(prices.window(first, count), cefs.window(first, count), purchase.window(first, count), dt,
                           volume_scale);
}

}  // namespace flexopt
