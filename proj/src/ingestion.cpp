#include "flexopt/ingestion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "json.hpp"

namespace flexopt {

namespace fs = std::filesystem;
using nlohmann::json;

// -----------------------------------------------------------------------------
// Dataset
// -----------------------------------------------------------------------------

void Dataset::validate() const {
    const std::size_t T = prices.size();
    const double dt = prices.dt_hours();
    if (T == 0) throw ValidationError("dataset: empty price series");
    auto check = [&](const TimeSeries& s, const std::string& name) {
        if (s.size() != T) {
            throw ValidationError("dataset: series '" + name + "' has length " + std::to_string(s.size()) +
                                  ", expected " + std::to_string(T));
        }
        if (s.dt_hours() != dt) throw ValidationError("dataset: series '" + name + "' has a different dt");
    };
    check(cefs, "cefs");
    check(edem, "edem");
    check(pv_profile, "pv_profile");
    check(wt_profile, "wt_profile");
    for (HeatLevelId id : {HeatLevelId::COOL_7_12, HeatLevelId::SPACE_75_55, HeatLevelId::PROC_95_75}) {
        auto it = heat_dem.find(id);
        if (it == heat_dem.end()) {
            throw ValidationError("dataset: missing heat demand for " + std::string(to_string(id)));
        }
        check(it->second, std::string(to_string(id)));
        if (it->second.min() < 0.0) throw ValidationError("dataset: negative heat demand");
    }
    if (edem.min() < 0.0) throw ValidationError("dataset: negative electricity demand");
    for (const auto* prof : {&pv_profile, &wt_profile}) {
        if (prof->min() < 0.0 || prof->max() > 1.2) {
            throw ValidationError("dataset: generation profile outside [0, 1.2] kW/kW_p");
        }
    }
    for (const auto& g : bev_groups) {
        g.validate();
        check(g.avail, "bev avail " + g.group_id);
        check(g.drive, "bev drive " + g.group_id);
    }
    grid.validate();
    fuel.validate();
    catalog.validate();
    heat_pump.validate();
}

// -----------------------------------------------------------------------------
// CSV
// -----------------------------------------------------------------------------

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

bool parse_index(const std::string& s, long long& out) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

std::string fmt_double(double x) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, ptr);
}

}  // namespace

TimeSeries load_timeseries(const fs::path& path, const ColumnSpec& spec) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open time series file " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ValidationError(path.string() + ": empty file");
    const auto header = split_csv(line);
    std::size_t t_col = header.size(), v_col = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        std::string h = header[i];
        if (i == 0 && h.size() >= 3 && static_cast<unsigned char>(h[0]) == 0xEF) h = h.substr(3);
        if (h == "t") t_col = i;
        if (h == spec.column) v_col = i;
    }
    if (t_col == header.size() || v_col == header.size()) {
        throw ValidationError(path.string() + ": header must contain 't' and '" + spec.column + "'");
    }

    std::vector<std::pair<long long, double>> rows;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) {
            ++row;
            continue;
        }
        const auto cells = split_csv(line);
        const std::string tcell = t_col < cells.size() ? cells[t_col] : std::string();
        const std::string vcell = v_col < cells.size() ? cells[v_col] : std::string();
        long long t = 0;
        if (!parse_index(tcell, t)) {
            throw ValidationError(path.string() + ": invalid time index at row " + std::to_string(row));
        }
        if (vcell.empty()) {
            throw ValidationError("missing value at row " + std::to_string(row) + " (" + path.string() + ")");
        }
        double v = 0.0;
        if (!parse_double(vcell, v)) {
            throw ValidationError(path.string() + ": non-numeric value '" + vcell + "' at row " +
                                  std::to_string(row));
        }
        rows.emplace_back(t, v);
        ++row;
    }
    if (rows.empty()) throw ValidationError(path.string() + ": no data rows");
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0 && rows[i].first == rows[i - 1].first) {
            throw ValidationError(path.string() + ": duplicate timestamp t=" + std::to_string(rows[i].first));
        }
        if (rows[i].first != static_cast<long long>(i)) {
            throw ValidationError(path.string() + ": missing timestamp t=" + std::to_string(i));
        }
    }
    if (spec.horizon && rows.size() != *spec.horizon) {
        throw ValidationError(path.string() + ": horizon mismatch, file has " + std::to_string(rows.size()) +
                              " rows but " + std::to_string(*spec.horizon) + " were declared");
    }
    std::vector<double> values;
    values.reserve(rows.size());
    for (const auto& r : rows) values.push_back(r.second);
    return TimeSeries(std::move(values), spec.dt_hours);
}

void write_timeseries(const fs::path& path, const TimeSeries& series) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write time series file " + path.string());
    out << "t,value\n";
    for (std::size_t t = 0; t < series.size(); ++t) out << t << ',' << fmt_double(series[t]) << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

// -----------------------------------------------------------------------------
// Preprocessing
// -----------------------------------------------------------------------------

InflexibleDemand derive_inflexible_demand(const TimeSeries& eg_buy_hist, const TimeSeries& pv_oc_hist,
                                          const TimeSeries& bev_drive_hist, const TimeSeries& cm_approx_hist) {
    const std::size_t T = eg_buy_hist.size();
    if (pv_oc_hist.size() != T || bev_drive_hist.size() != T || cm_approx_hist.size() != T) {
        throw ValidationError("derive_inflexible_demand: length mismatch");
    }
    InflexibleDemand out;
    std::vector<double> d(T);
    for (std::size_t t = 0; t < T; ++t) {
        const double raw = eg_buy_hist[t] + pv_oc_hist[t] - bev_drive_hist[t] - cm_approx_hist[t];
        if (raw < 0.0) {
            ++out.clamped;
            d[t] = 0.0;
        } else {
            d[t] = raw;
        }
    }
    out.demand = TimeSeries(std::move(d), eg_buy_hist.dt_hours());
    return out;
}

std::vector<BevGroup> aggregate_bev_fleet(const std::vector<BevBattery>& batteries,
                                          const std::map<std::string, TimeSeries>& patterns,
                                          const BevGroup& defaults) {
    std::vector<BevGroup> groups;
    std::map<std::string, std::size_t> index;
    for (const auto& b : batteries) {
        auto pit = patterns.find(b.pattern_id);
        if (pit == patterns.end()) throw ValidationError("unknown BEV availability pattern '" + b.pattern_id + "'");
        if (b.drive.size() != pit->second.size()) {
            throw ValidationError("BEV battery drive length does not match pattern '" + b.pattern_id + "'");
        }
        auto [it, inserted] = index.try_emplace(b.pattern_id, groups.size());
        if (inserted) {
            BevGroup g = defaults;
            g.group_id = b.pattern_id;
            g.e_cap = b.e_cap;
            g.avail = pit->second;
            g.drive = b.drive;
            groups.push_back(std::move(g));
        } else {
            BevGroup& g = groups[it->second];
            g.e_cap += b.e_cap;
            std::vector<double> d = g.drive.values();
            for (std::size_t t = 0; t < d.size(); ++t) d[t] += b.drive[t];
            g.drive = TimeSeries(std::move(d), g.drive.dt_hours());
        }
    }
    return groups;
}

TimeSeries scale_prices(const TimeSeries& series, double target_mean, double target_std) {
    const double m = series.mean();
    const double s = series.stddev();
    if (!(s > 0.0)) throw InvalidParameter("scale_prices: source series has zero standard deviation");
    if (!(target_std > 0.0)) throw InvalidParameter("scale_prices: target std must be > 0");
    const double a = target_std / s;
    const double b = target_mean - a * m;
    std::vector<double> y(series.size());
    for (std::size_t t = 0; t < y.size(); ++t) y[t] = a * series[t] + b;
    return TimeSeries(std::move(y), series.dt_hours(), series.start_label());
}

// -----------------------------------------------------------------------------
// Catalog defaults
// -----------------------------------------------------------------------------

TechCatalog default_catalog() {
    TechCatalog c;
    c.discount_rate = 0.10;
    c.reference_cooling_machine_kw = 1147.0;
    auto add = [&](TechParams p) { c.techs[p.tech_id] = std::move(p); };

    TechParams chp;
    chp.tech_id = TechId::CHP;
    chp.c_inv = 589.46;
    chp.base_unit = BaseUnit::kW_el;
    chp.rmi_frac = 0.18;
    chp.life_years = 25;
    chp.efficiencies = {{Carrier::Electricity, 0.40}, {Carrier::Heat, 0.45}};
    chp.cap_existing = 410.0 * 0.40 / 0.45;  // 410 kW_th nominal
    chp.cap_new_max = 0.0;
    add(chp);

    TechParams elc;
    elc.tech_id = TechId::Elc;
    elc.c_inv = 1295.0;
    elc.base_unit = BaseUnit::kW_el;
    elc.rmi_frac = 0.038;
    elc.life_years = 14;
    elc.efficiencies = {{Carrier::Hydrogen, 0.71}};
    add(elc);

    TechParams fc;
    fc.tech_id = TechId::FC;
    fc.c_inv = 1684.0;
    fc.base_unit = BaseUnit::kW_el;
    fc.rmi_frac = 0.038;
    fc.life_years = 14;
    fc.efficiencies = {{Carrier::Electricity, 0.50}, {Carrier::Heat, 0.34}};
    add(fc);

    TechParams hob;
    hob.tech_id = TechId::HOB;
    hob.c_inv = 57.13;
    hob.base_unit = BaseUnit::kW_th;
    hob.rmi_frac = 0.18;
    hob.life_years = 15;
    hob.efficiencies = {{Carrier::Heat, 0.90}};
    hob.cap_existing = 1620.0;
    hob.cap_new_max = 0.0;
    add(hob);

    TechParams hp;
    hp.tech_id = TechId::HP;
    hp.c_inv = 387.0;
    hp.base_unit = BaseUnit::kW_th;
    hp.rmi_frac = 0.025;
    hp.life_years = 18;
    hp.cap_new_max = 5000.0;
    add(hp);

    TechParams p2h;
    p2h.tech_id = TechId::P2H;
    p2h.c_inv = 100.0;
    p2h.base_unit = BaseUnit::kW_th;
    p2h.rmi_frac = 0.0;
    p2h.life_years = 30;
    p2h.efficiencies = {{Carrier::Heat, 0.90}};
    add(p2h);

    TechParams pv;
    pv.tech_id = TechId::PV;
    pv.c_inv = 460.0;
    pv.base_unit = BaseUnit::kW_p;
    pv.rmi_frac = 0.02;
    pv.life_years = 25;
    pv.cap_existing = 307.0;
    pv.cap_new_max = 2770.0;
    add(pv);

    TechParams wt;
    wt.tech_id = TechId::WT;
    wt.c_inv = 1682.0;
    wt.base_unit = BaseUnit::kW_p;
    wt.rmi_frac = 0.01;
    wt.life_years = 20;
    wt.cap_new_max = 10'000.0;
    add(wt);

    TechParams bes;
    bes.tech_id = TechId::BES;
    bes.c_inv = 600.0;
    bes.base_unit = BaseUnit::kWh_el;
    bes.rmi_frac = 0.02;
    bes.life_years = 20;
    bes.eta_cycle = 0.95;
    bes.eta_time = 0.99998;
    bes.c_rate_in = 0.7;
    bes.c_rate_out = 0.7;
    add(bes);

    TechParams h2s;
    h2s.tech_id = TechId::H2S;
    h2s.c_inv = 10.0;
    h2s.base_unit = BaseUnit::kWh_H2;
    h2s.rmi_frac = 0.0;
    h2s.life_years = 23;
    h2s.eta_cycle = 0.90;
    add(h2s);

    TechParams tes;
    tes.tech_id = TechId::TES;
    tes.c_inv = 28.71;
    tes.base_unit = BaseUnit::kWh_th;
    tes.rmi_frac = 0.001;
    tes.life_years = 30;
    tes.eta_time = 0.995;
    tes.c_rate_in = 0.5;
    tes.c_rate_out = 0.5;
    add(tes);

    return c;
}

HPParams default_heat_pump() {
    HPParams hp;
    hp.eta_carnot = 0.5;
    hp.n_modes = 2;
    hp.sources = {standard_level(HeatLevelId::COOL_7_12), well_level()};
    hp.sinks = {well_level(), standard_level(HeatLevelId::SPACE_75_55)};
    return hp;
}

// -----------------------------------------------------------------------------
// Synthetic generator
// -----------------------------------------------------------------------------

SynthParams SynthParams::from_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open synth params " + path.string());
    json j = json::parse(in);
    SynthParams p;
#define FLEXOPT_GET(field) if (j.contains(#field)) j.at(#field).get_to(p.field)
    FLEXOPT_GET(start_day);
    FLEXOPT_GET(price_mean);
    FLEXOPT_GET(price_std);
    FLEXOPT_GET(price_daily_spread);
    FLEXOPT_GET(cef_mean);
    FLEXOPT_GET(cef_price_coupling);
    FLEXOPT_GET(edem_base);
    FLEXOPT_GET(edem_shift);
    FLEXOPT_GET(heat_proc_base);
    FLEXOPT_GET(heat_space_base);
    FLEXOPT_GET(cool_base);
    FLEXOPT_GET(cool_summer);
    FLEXOPT_GET(pv_peak);
    FLEXOPT_GET(wt_mean);
    FLEXOPT_GET(bev_battery_kwh);
    FLEXOPT_GET(bev_batteries_per_group);
    FLEXOPT_GET(bev_drive_kw_per_battery);
#undef FLEXOPT_GET
    return p;
}

void SynthParams::to_json_file(const fs::path& path) const {
    json j = {
        {"start_day", start_day},
        {"price_mean", price_mean},
        {"price_std", price_std},
        {"price_daily_spread", price_daily_spread},
        {"cef_mean", cef_mean},
        {"cef_price_coupling", cef_price_coupling},
        {"edem_base", edem_base},
        {"edem_shift", edem_shift},
        {"heat_proc_base", heat_proc_base},
        {"heat_space_base", heat_space_base},
        {"cool_base", cool_base},
        {"cool_summer", cool_summer},
        {"pv_peak", pv_peak},
        {"wt_mean", wt_mean},
        {"bev_battery_kwh", bev_battery_kwh},
        {"bev_batteries_per_group", bev_batteries_per_group},
        {"bev_drive_kw_per_battery", bev_drive_kw_per_battery},
    };
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

namespace {

/// Stationary AR(1) process with unit variance.
class Ar1 {
public:
    Ar1(double phi, std::mt19937_64& rng) : phi_(phi), rng_(rng), x_(normal_(rng)) {}
    double next() {
        x_ = phi_ * x_ + std::sqrt(1.0 - phi_ * phi_) * normal_(rng_);
        return x_;
    }

private:
    double phi_;
    std::mt19937_64& rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    double x_;
};

double gauss_bump(double h, double centre, double width) {
    return std::exp(-(h - centre) * (h - centre) / width);
}

}  // namespace

Dataset generate_synthetic_dataset(std::uint64_t seed, std::size_t horizon, const SynthParams& p) {
    if (horizon < 24 || horizon > 8760) {
        throw InvalidParameter("generate_synthetic_dataset: horizon must be in [24, 8760], got " +
                               std::to_string(horizon));
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    Ar1 price_noise(0.85, rng);
    Ar1 cef_noise(0.9, rng);
    Ar1 wind(0.97, rng);

    const std::size_t T = horizon;
    std::vector<double> price(T), cef(T), edem(T), proc(T), space(T), cool(T), pv(T), wt(T);
    std::vector<double> wind_dev(T);
    double clearness = 0.0;

    for (std::size_t t = 0; t < T; ++t) {
        const int day = (p.start_day + static_cast<int>(t / 24)) % 365;
        const double h = static_cast<double>(t % 24);
        const int weekday = (day + 1) % 7;  // 0 = Monday; day 0 is a Tuesday
        const bool weekend = weekday >= 5;
        const double season = std::cos(2.0 * std::numbers::pi * (day - 172) / 365.0);
        const bool production = !weekend && h >= 6 && h < 22;
        if (t % 24 == 0) clearness = 0.35 + 0.65 * unif(rng);

        // wind first: it depresses prices and CEFs
        const double w = wind.next();
        wt[t] = std::clamp(p.wt_mean + 0.3 * w, 0.0, 1.0);
        wind_dev[t] = w;

        double shape = gauss_bump(h, 8.0, 8.0) + 1.2 * gauss_bump(h, 19.0, 6.0) -
                       0.6 * std::max(0.0, season) * gauss_bump(h, 13.0, 6.0);
        if (weekend) shape -= 0.35;
        price[t] = p.price_daily_spread * shape + 4.0 * price_noise.next() - 6.0 * w;

        // PV: zero at night, bell shape between sunrise and sunset
        double pv_val = 0.0;
        if (h >= kPvNightEnd && h < kPvNightStart) {
            const double day_length = 12.0 + 4.0 * season;
            const double sunrise = 13.0 - day_length / 2.0;
            const double x = (h + 0.5 - sunrise) / day_length;
            if (x > 0.0 && x < 1.0) {
                pv_val = p.pv_peak * (0.75 + 0.25 * season) * std::sin(std::numbers::pi * x) * clearness;
            }
        }
        pv[t] = std::clamp(pv_val, 0.0, 1.2);

        edem[t] = std::max(0.0, p.edem_base * (1.0 + 0.08 * season) + (production ? p.edem_shift : 0.0) +
                                    30.0 * normal(rng));
        proc[t] = std::max(0.0, p.heat_proc_base * (production ? 1.8 : 1.0) + 15.0 * normal(rng));
        space[t] = std::max(0.0, p.heat_space_base * (1.0 - 0.6 * season) * (production ? 1.3 : 0.9) +
                                     10.0 * normal(rng));
        cool[t] = std::clamp(p.cool_base + p.cool_summer * std::max(0.0, season) + (production ? 60.0 : 0.0) +
                                 50.0 * gauss_bump(h, 15.0, 12.0) + 20.0 * normal(rng),
                             0.0, 780.0);
    }

    Dataset ds;
    ds.prices = scale_prices(TimeSeries(price), p.price_mean, p.price_std);
    // CEF follows the standardised price shape plus its own noise and the wind signal
    for (std::size_t t = 0; t < T; ++t) {
        const double z = (ds.prices[t] - p.price_mean) / p.price_std;
        cef[t] = std::clamp(p.cef_mean + 0.08 * p.cef_price_coupling * z +
                                0.05 * (1.0 - p.cef_price_coupling) * cef_noise.next() - 0.03 * wind_dev[t],
                            0.08, 0.9);
    }
    ds.cefs = TimeSeries(cef);
    ds.edem = TimeSeries(edem);
    ds.heat_dem[HeatLevelId::PROC_95_75] = TimeSeries(proc);
    ds.heat_dem[HeatLevelId::SPACE_75_55] = TimeSeries(space);
    ds.heat_dem[HeatLevelId::COOL_7_12] = TimeSeries(cool);
    ds.pv_profile = TimeSeries(pv);
    ds.wt_profile = TimeSeries(wt);

    // Two truck fleets on alternating shifts; unavailable (driving) during their shift.
    std::map<std::string, TimeSeries> patterns;
    std::vector<BevBattery> batteries;
    const std::pair<std::string, std::pair<int, int>> shifts[] = {{"early_shift", {6, 14}},
                                                                 {"late_shift", {14, 22}}};
    for (const auto& [name, window] : shifts) {
        std::vector<double> avail(T);
        std::vector<double> on_shift(T);
        for (std::size_t t = 0; t < T; ++t) {
            const int day = (p.start_day + static_cast<int>(t / 24)) % 365;
            const int h = static_cast<int>(t % 24);
            const bool weekend = (day + 1) % 7 >= 5;
            const bool driving = !weekend && h >= window.first && h < window.second;
            avail[t] = driving ? 0.0 : 1.0;
            on_shift[t] = driving ? 1.0 : 0.0;
        }
        patterns.emplace(name, TimeSeries(avail));
        for (int b = 0; b < p.bev_batteries_per_group; ++b) {
            std::vector<double> drive(T);
            for (std::size_t t = 0; t < T; ++t) {
                drive[t] = on_shift[t] * p.bev_drive_kw_per_battery * (0.8 + 0.4 * unif(rng));
            }
            batteries.push_back({p.bev_battery_kwh, name, TimeSeries(drive)});
        }
    }
    ds.bev_groups = aggregate_bev_fleet(batteries, patterns);

    ds.grid = GridParams{};
    ds.fuel = FuelParams{};
    ds.catalog = default_catalog();
    ds.heat_pump = default_heat_pump();
    ds.validate();
    return ds;
}

// -----------------------------------------------------------------------------
// Bundle
// -----------------------------------------------------------------------------

namespace {

constexpr const char* kBundleSchema = "flexopt-dataset/1";

json carrier_map_to_json(const std::map<Carrier, double>& m) {
    json j = json::object();
    for (const auto& [c, v] : m) {
        const char* key = c == Carrier::Electricity ? "electricity" : c == Carrier::Heat ? "heat" : "hydrogen";
        j[key] = v;
    }
    return j;
}

std::map<Carrier, double> carrier_map_from_json(const json& j) {
    std::map<Carrier, double> m;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() == "electricity") m[Carrier::Electricity] = it.value().get<double>();
        else if (it.key() == "heat") m[Carrier::Heat] = it.value().get<double>();
        else if (it.key() == "hydrogen") m[Carrier::Hydrogen] = it.value().get<double>();
        else throw ValidationError("unknown carrier '" + it.key() + "'");
    }
    return m;
}

// JSON has no infinity; unbounded values are written as null.
json num_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }
double num_or_inf(const json& j) { return j.is_null() ? kInf : j.get<double>(); }

json level_to_json(const HeatLevel& l) {
    return {{"name", l.name}, {"flow_c", l.flow_c}, {"return_c", l.return_c}, {"exchanger_dt", l.exchanger_dt}};
}

HeatLevel level_from_json(const json& j) {
    return {j.at("name").get<std::string>(), j.at("flow_c").get<double>(), j.at("return_c").get<double>(),
            j.at("exchanger_dt").get<double>()};
}

BaseUnit base_unit_from_string(const std::string& s) {
    for (BaseUnit u : {BaseUnit::kW_el, BaseUnit::kW_th, BaseUnit::kW_p, BaseUnit::kWh_el, BaseUnit::kWh_th,
                       BaseUnit::kWh_H2}) {
        if (to_string(u) == s) return u;
    }
    throw ValidationError("unknown base unit '" + s + "'");
}

}  // namespace

void save_bundle(const Dataset& ds, const fs::path& dir) {
    ds.validate();
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create bundle directory " + dir.string() + ": " + ec.message());

    json series = json::object();
    auto put = [&](const std::string& role, const TimeSeries& s, const std::string& unit) {
        const std::string file = role + ".csv";
        write_timeseries(dir / file, s);
        series[role] = {{"file", file}, {"unit", unit}};
    };
    put("prices", ds.prices, "EUR/MWh");
    put("cefs", ds.cefs, "t/MWh");
    put("edem", ds.edem, "kW");
    for (const auto& [id, s] : ds.heat_dem) put("heat_" + std::string(to_string(id)), s, "kW");
    put("pv_profile", ds.pv_profile, "kW/kW_p");
    put("wt_profile", ds.wt_profile, "kW/kW_p");

    json bev = json::array();
    for (const auto& g : ds.bev_groups) {
        const std::string avail_file = "bev_" + g.group_id + "_avail.csv";
        const std::string drive_file = "bev_" + g.group_id + "_drive.csv";
        write_timeseries(dir / avail_file, g.avail);
        write_timeseries(dir / drive_file, g.drive);
        bev.push_back({{"group_id", g.group_id},
                       {"e_cap", g.e_cap},
                       {"k_ini", g.k_ini},
                       {"k_empty", g.k_empty},
                       {"k_full", g.k_full},
                       {"lambda_in", g.lambda_in},
                       {"lambda_v2x", g.lambda_v2x},
                       {"eta_cycle", g.eta_cycle},
                       {"avail", {{"file", avail_file}, {"unit", "1"}}},
                       {"drive", {{"file", drive_file}, {"unit", "kW"}}}});
    }

    json techs = json::object();
    for (const auto& [id, p] : ds.catalog.techs) {
        techs[std::string(to_string(id))] = {
            {"c_inv", p.c_inv},
            {"base_unit", std::string(to_string(p.base_unit))},
            {"rmi_frac", p.rmi_frac},
            {"life_years", p.life_years},
            {"efficiencies", carrier_map_to_json(p.efficiencies)},
            {"c_rate_in", num_or_null(p.c_rate_in)},
            {"c_rate_out", num_or_null(p.c_rate_out)},
            {"eta_cycle", p.eta_cycle},
            {"eta_time", p.eta_time},
            {"k_ini", p.k_ini},
            {"cap_existing", p.cap_existing},
            {"cap_new_max", num_or_null(p.cap_new_max)},
        };
    }
    json hp_sources = json::array(), hp_sinks = json::array();
    for (const auto& l : ds.heat_pump.sources) hp_sources.push_back(level_to_json(l));
    for (const auto& l : ds.heat_pump.sinks) hp_sinks.push_back(level_to_json(l));

    json manifest = {
        {"schema", kBundleSchema},
        {"horizon", ds.horizon()},
        {"dt_hours", ds.dt_hours()},
        {"series", series},
        {"bev_groups", bev},
        {"grid",
         {{"p_buy_max", ds.grid.p_buy_max},
          {"p_sell_max", ds.grid.p_sell_max},
          {"c_addon", ds.grid.c_addon},
          {"c_peak_fee", ds.grid.c_peak_fee}}},
        {"fuel", {{"c_ng", ds.fuel.c_ng}, {"cef_ng", ds.fuel.cef_ng}, {"c_carbon_tax", ds.fuel.c_carbon_tax}}},
        {"catalog",
         {{"discount_rate", ds.catalog.discount_rate},
          {"reference_cooling_machine_kw", ds.catalog.reference_cooling_machine_kw},
          {"techs", techs}}},
        {"heat_pump",
         {{"eta_carnot", ds.heat_pump.eta_carnot},
          {"n_modes", ds.heat_pump.n_modes},
          {"sources", hp_sources},
          {"sinks", hp_sinks}}},
    };
    std::ofstream out(dir / "dataset.json");
    if (!out) throw IoError("cannot write manifest in " + dir.string());
    out << manifest.dump(2) << '\n';
}

Dataset load_bundle(const fs::path& dir) {
    std::ifstream in(dir / "dataset.json");
    if (!in) throw IoError("bundle manifest not found: " + (dir / "dataset.json").string());
    json m;
    try {
        m = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed dataset manifest: ") + e.what());
    }
    try {
        if (m.at("schema").get<std::string>() != kBundleSchema) {
            throw ValidationError("unsupported dataset schema '" + m.at("schema").get<std::string>() + "'");
        }
        ColumnSpec spec;
        spec.horizon = m.at("horizon").get<std::size_t>();
        spec.dt_hours = m.at("dt_hours").get<double>();
        auto series = [&](const json& entry) { return load_timeseries(dir / entry.at("file").get<std::string>(), spec); };
        const json& s = m.at("series");

        Dataset ds;
        ds.prices = series(s.at("prices"));
        ds.cefs = series(s.at("cefs"));
        ds.edem = series(s.at("edem"));
        for (HeatLevelId id : {HeatLevelId::COOL_7_12, HeatLevelId::SPACE_75_55, HeatLevelId::PROC_95_75}) {
            ds.heat_dem[id] = series(s.at("heat_" + std::string(to_string(id))));
        }
        ds.pv_profile = series(s.at("pv_profile"));
        ds.wt_profile = series(s.at("wt_profile"));
        for (const auto& g : m.at("bev_groups")) {
            BevGroup b;
            b.group_id = g.at("group_id").get<std::string>();
            b.e_cap = g.at("e_cap").get<double>();
            b.k_ini = g.at("k_ini").get<double>();
            b.k_empty = g.at("k_empty").get<double>();
            b.k_full = g.at("k_full").get<double>();
            b.lambda_in = g.at("lambda_in").get<double>();
            b.lambda_v2x = g.at("lambda_v2x").get<double>();
            b.eta_cycle = g.at("eta_cycle").get<double>();
            b.avail = series(g.at("avail"));
            b.drive = series(g.at("drive"));
            ds.bev_groups.push_back(std::move(b));
        }
        const json& gr = m.at("grid");
        ds.grid = {gr.at("p_buy_max").get<double>(), gr.at("p_sell_max").get<double>(),
                   gr.at("c_addon").get<double>(), gr.at("c_peak_fee").get<double>()};
        const json& fu = m.at("fuel");
        ds.fuel = {fu.at("c_ng").get<double>(), fu.at("cef_ng").get<double>(), fu.at("c_carbon_tax").get<double>()};
        const json& cat = m.at("catalog");
        ds.catalog.discount_rate = cat.at("discount_rate").get<double>();
        ds.catalog.reference_cooling_machine_kw = cat.at("reference_cooling_machine_kw").get<double>();
        for (auto it = cat.at("techs").begin(); it != cat.at("techs").end(); ++it) {
            const json& t = it.value();
            TechParams p;
            p.tech_id = tech_from_string(it.key());
            p.c_inv = t.at("c_inv").get<double>();
            p.base_unit = base_unit_from_string(t.at("base_unit").get<std::string>());
            p.rmi_frac = t.at("rmi_frac").get<double>();
            p.life_years = t.at("life_years").get<int>();
            p.efficiencies = carrier_map_from_json(t.at("efficiencies"));
            p.c_rate_in = num_or_inf(t.at("c_rate_in"));
            p.c_rate_out = num_or_inf(t.at("c_rate_out"));
            p.eta_cycle = t.at("eta_cycle").get<double>();
            p.eta_time = t.at("eta_time").get<double>();
            p.k_ini = t.at("k_ini").get<double>();
            p.cap_existing = t.at("cap_existing").get<double>();
            p.cap_new_max = num_or_inf(t.at("cap_new_max"));
            ds.catalog.techs[p.tech_id] = p;
        }
        const json& hp = m.at("heat_pump");
        ds.heat_pump.eta_carnot = hp.at("eta_carnot").get<double>();
        ds.heat_pump.n_modes = hp.at("n_modes").get<int>();
        for (const auto& l : hp.at("sources")) ds.heat_pump.sources.push_back(level_from_json(l));
        for (const auto& l : hp.at("sinks")) ds.heat_pump.sinks.push_back(level_from_json(l));
        ds.validate();
        return ds;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed dataset manifest: ") + e.what());
    }
}

}  // namespace flexopt
