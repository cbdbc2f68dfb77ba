#include "flexopt/reporting.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "flexopt/scenario_engine.hpp"
#include "json.hpp"

namespace flexopt {

using nlohmann::json;

namespace {

/// Reads variable values grouped by (symbol, component, mode).
class Extract {
public:
    Extract(const ModelInstance& model, const SolveResult& result, double energy_coef)
        : model_(model), x_(result.values), e_(energy_coef) {}

    bool has(const std::string& symbol, const std::string& comp) const {
        return !model_.select(symbol, comp).empty();
    }

    /// Hourly values ordered by t; empty when no such variable exists.
    std::vector<double> series(const std::string& symbol, const std::string& comp, const std::string& mode = {}) const {
        std::vector<double> out;
        for (const auto& [key, idx] : model_.select(symbol, comp)) {
            if (key.mode == mode && key.t >= 0) out.push_back(x_.at(idx));
        }
        return out;
    }

    /// Annual energy in MWh of an hourly kW variable family.
    double energy(const std::string& symbol, const std::string& comp, const std::string& mode = {}) const {
        return e_ * compensated_sum(series(symbol, comp, mode));
    }

    double scalar(const std::string& symbol, const std::string& comp = {}) const {
        auto idx = model_.find({symbol, comp, "", -1});
        return idx ? x_.at(*idx) : 0.0;
    }

    double weighted(const std::vector<double>& flow, const std::vector<double>& coef) const {
        std::vector<double> terms;
        terms.reserve(flow.size());
        for (std::size_t t = 0; t < flow.size(); ++t) terms.push_back(flow[t] * coef.at(t));
        return e_ * compensated_sum(terms);
    }

    double coef() const { return e_; }

private:
    const ModelInstance& model_;
    const std::vector<double>& x_;
    double e_;
};

TechId tech_of_component(const std::string& comp) {
    if (comp.rfind("TES_", 0) == 0) return TechId::TES;
    return tech_from_string(comp);
}

std::string heat_node(HeatLevelId id) { return std::string(to_string(id)); }

std::vector<std::string> storage_components(const ModelInstance& model) {
    std::vector<std::string> out;
    for (const std::string c : {"BES", "H2S", "TES_COOL_7_12", "TES_SPACE_75_55", "TES_PROC_95_75"}) {
        if (!model.select("P_in", c).empty()) out.push_back(c);
    }
    return out;
}

}  // namespace

AnnualReport annual_balances(const ModelInstance& model, const SolveResult& result, const Dataset& dataset,
                             const ContextConfig& context, const BuildReport& build, const VerifyTolerances& tol) {
    const auto check = verify_solution(model, result, tol);
    if (!check.ok()) {
        std::ostringstream os;
        os << "solution failed verification (max row violation " << check.max_constraint_violation << " at "
           << check.worst_constraint << ", bound violation " << check.max_bound_violation << ", objective error "
           << check.objective_rel_error << ")";
        throw ValidationError(os.str());
    }
    const double e = build.annual_weight * build.dt_hours * 1e-3;
    Extract x(model, result, e);
    AnnualReport r;

    // Investments
    std::vector<double> capex, rmi;
    for (std::size_t j = 0; j < model.num_variables(); ++j) {
        const auto& key = model.key_of(j);
        if (key.symbol != "P_capn" && key.symbol != "E_capn") continue;
        const double cap = result.values[j];
        const TechParams& p = dataset.catalog.at(tech_of_component(key.component));
        capex.push_back(annuity_factor(dataset.catalog.discount_rate, p.life_years) * p.c_inv * cap);
        rmi.push_back(p.rmi_frac * p.c_inv * cap);
        r.new_capacities[key.component] = cap;
    }
    r.capex = compensated_sum(capex);
    r.opex_rmi = compensated_sum(rmi);

    // Grid
    const auto buy = x.series("P_buy", "EG");
    const auto sell = x.series("P_sell", "EG");
    const auto& prices = context.price_series.values();
    const auto& cefs = dataset.cefs.values();
    const std::vector<double> addon(buy.size(), dataset.grid.c_addon);
    r.opex_eg_buy = x.weighted(buy, prices);
    r.opex_eg_sell = x.weighted(sell, prices);
    r.opex_eg_network_fee = x.weighted(buy, addon) + dataset.grid.c_peak_fee * x.scalar("P_peak", "EG");
    r.ce_scope2 = x.weighted(buy, cefs);
    r.peak_buy = buy.empty() ? 0.0 : *std::max_element(buy.begin(), buy.end());
    r.volume_buy = x.energy("P_buy", "EG");
    r.volume_sell = x.energy("P_sell", "EG");

    const auto wt_oc = x.series("P_oc", "WT");
    r.opex_wt_network_fee = x.weighted(wt_oc, std::vector<double>(wt_oc.size(), dataset.grid.c_addon));

    const double ng = x.energy("P_ng", "NG");
    r.opex_ng = ng * dataset.fuel.c_ng;
    r.opex_ng_tax = ng * dataset.fuel.cef_ng * dataset.fuel.c_carbon_tax;
    r.ce_scope1 = ng * dataset.fuel.cef_ng;

    r.ce_removed = x.scalar("CE_dac");
    r.opex_dac = build.c_dac * r.ce_removed;
    r.ce_net = r.ce_scope1 + r.ce_scope2 - r.ce_removed;
    r.penalty = x.scalar("X_penalty");

    r.opex = compensated_sum({r.opex_rmi, r.opex_eg_buy, -r.opex_eg_sell, r.opex_eg_network_fee,
                              r.opex_wt_network_fee, r.opex_ng, r.opex_ng_tax, r.opex_dac});
    r.tac = r.capex + r.opex;

    // Heat pump and hourly plot series
    std::vector<double> hp_el(buy.size(), 0.0);
    for (const auto& m : build.hp_modes) {
        const auto q = x.series("Q_hp", "HP", hp_mode_name(m));
        r.hp_mode_energy[hp_mode_name(m)] = e * compensated_sum(q);
        for (std::size_t t = 0; t < q.size(); ++t) hp_el[t] += q[t] / m.cop;
    }
    std::vector<double> bev_in(buy.size(), 0.0), v2x(buy.size(), 0.0);
    for (const auto& g : dataset.bev_groups) {
        const auto in = x.series("P_in", bev_component(g));
        const auto out = x.series("P_v2x", bev_component(g));
        for (std::size_t t = 0; t < in.size(); ++t) bev_in[t] += in[t];
        for (std::size_t t = 0; t < out.size(); ++t) v2x[t] += out[t];
    }
    auto p2h = x.series("P_in", "P2H", "el");
    if (p2h.empty()) p2h.assign(buy.size(), 0.0);
    r.hourly = {{"buy", buy}, {"sell", sell}, {"bev_charge", bev_in}, {"v2x", v2x}, {"hp_el", hp_el}, {"p2h_el", p2h}};
    return r;
}

// -----------------------------------------------------------------------------
// Flow table
// -----------------------------------------------------------------------------

bool is_boundary_node(const std::string& node) {
    static const std::vector<std::string> fixed{"EG", "NG", "PV", "WT", "WELL", "AMBIENT", "DRIVE"};
    return std::find(fixed.begin(), fixed.end(), node) != fixed.end() || node.rfind("DEM_", 0) == 0;
}

std::map<std::string, double> FlowTable::imbalances() const {
    std::map<std::string, double> net;
    for (const auto& f : rows) {
        if (!is_boundary_node(f.to)) net[f.to] += f.mwh;
        if (!is_boundary_node(f.from)) net[f.from] -= f.mwh;
    }
    return net;
}

std::map<std::string, double> FlowTable::throughput() const {
    std::map<std::string, double> tp;
    for (const auto& f : rows) {
        tp[f.to] += std::abs(f.mwh);
        tp[f.from] += std::abs(f.mwh);
    }
    return tp;
}

FlowTable flow_table(const ModelInstance& model, const SolveResult& result, const Dataset& dataset,
                     const BuildReport& build) {
    if (!result.has_values()) throw SolverError("flow table needs solution values");
    const double e = build.annual_weight * build.dt_hours * 1e-3;
    Extract x(model, result, e);
    std::map<std::pair<std::string, std::string>, double> acc;
    auto add = [&](const std::string& from, const std::string& to, double mwh) {
        if (mwh < 0.0) {
            acc[{to, from}] += -mwh;
        } else {
            acc[{from, to}] += mwh;
        }
    };
    const std::string elec = "ELEC", h2 = "H2", feedin = "FEEDIN";
    const std::string proc = heat_node(HeatLevelId::PROC_95_75);
    const std::string space = heat_node(HeatLevelId::SPACE_75_55);
    const std::string cool = heat_node(HeatLevelId::COOL_7_12);

    if (x.has("P_buy", "EG")) {
        add("EG", elec, x.energy("P_buy", "EG"));
        add(feedin, "EG", x.energy("P_sell", "EG"));
    }

    for (const std::string v : {"PV", "WT"}) {
        if (!x.has("P_oc", v)) continue;
        add(v, elec, x.energy("P_oc", v));
        add(v, feedin, x.energy("P_fi", v));
    }

    struct Conv {
        std::string comp, in_mode, in_node;
        std::vector<std::pair<std::string, std::string>> outs;  // mode, node
    };
    const std::vector<Conv> convs{
        {"CHP", "ng", "NG", {{"el", elec}, {"heat", proc}}},
        {"HOB", "ng", "NG", {{"heat", proc}}},
        {"P2H", "el", elec, {{"heat", proc}}},
        {"Elc", "el", elec, {{"h2", h2}}},
        {"FC", "h2", h2, {{"el", elec}, {"heat", space}}},
    };
    for (const auto& c : convs) {
        if (!x.has("P_in", c.comp)) continue;
        const double in = x.energy("P_in", c.comp, c.in_mode);
        add(c.in_node, c.comp, in);
        double out_sum = 0.0;
        for (const auto& [mode, node] : c.outs) {
            const double out = x.energy("P_out", c.comp, mode);
            add(c.comp, node, out);
            out_sum += out;
        }
        add(c.comp, "AMBIENT", in - out_sum);
    }

    const std::string well = well_level().name;
    for (const auto& m : build.hp_modes) {
        const auto q = x.series("Q_hp", "HP", hp_mode_name(m));
        const double heat = e * compensated_sum(q);
        const double el = heat / m.cop;
        add(elec, "HP", el);
        add(m.source == cool ? cool : "WELL", "HP", heat - el);
        add("HP", m.sink == space ? space : "WELL", heat);
    }
    if (x.has("Q_hd", "HD")) add(proc, space, x.energy("Q_hd", "HD"));

    for (const auto& comp : storage_components(model)) {
        const double in = x.energy("P_in", comp);
        const double out = x.energy("P_out", comp);
        std::string bus = comp == "BES" ? elec : comp == "H2S" ? h2 : comp.substr(4);
        if (bus == cool) {
            // Heat direction: discharging a cold store absorbs heat from the cooling bus.
            add(cool, comp, out);
            add(comp, cool, in);
            add("AMBIENT", comp, in - out);
        } else {
            add(bus, comp, in);
            add(comp, bus, out);
            add(comp, "AMBIENT", in - out);
        }
    }

    for (const auto& g : dataset.bev_groups) {
        const std::string comp = bev_component(g);
        if (!x.has("P_in", comp)) continue;
        const double in = x.energy("P_in", comp);
        const double v2x = x.energy("P_v2x", comp);
        const double drive = e * g.drive.sum();
        add(elec, "BEV", in);
        add("BEV", elec, v2x);
        add("BEV", "DRIVE", drive);
        add("BEV", "AMBIENT", in - v2x - drive);
    }

    add(elec, "DEM_ELEC", e * dataset.edem.sum());
    add(proc, "DEM_" + proc, e * dataset.heat_dem.at(HeatLevelId::PROC_95_75).sum());
    add(space, "DEM_" + space, e * dataset.heat_dem.at(HeatLevelId::SPACE_75_55).sum());
    add("DEM_" + cool, cool, e * dataset.heat_dem.at(HeatLevelId::COOL_7_12).sum());

    FlowTable table;
    for (const auto& [k, v] : acc) {
        if (v > 1e-9) table.rows.push_back({k.first, k.second, v});
    }
    return table;
}

// -----------------------------------------------------------------------------
// JSON
// -----------------------------------------------------------------------------

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
std::optional<double> opt_from(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}
// JSON cannot carry infinities; they never occur in reported figures but are guarded anyway.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double num_from(const json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

json to_json(const MetricSet& m) {
    return {{"ewap", opt(m.ewap)},         {"twap", opt(m.twap)},         {"ewacef", opt(m.ewacef)},
            {"twacef", opt(m.twacef)},     {"pi_rate", opt(m.pi_rate)},   {"eps_rate", opt(m.eps_rate)},
            {"omega", opt(m.omega)},       {"tcer", opt(m.tcer)},         {"ecer", opt(m.ecer)},
            {"peak_buy", num(m.peak_buy)}, {"volume_buy", num(m.volume_buy)}};
}

MetricSet metrics_from(const json& j) {
    MetricSet m;
    m.ewap = opt_from(j, "ewap");
    m.twap = opt_from(j, "twap");
    m.ewacef = opt_from(j, "ewacef");
    m.twacef = opt_from(j, "twacef");
    m.pi_rate = opt_from(j, "pi_rate");
    m.eps_rate = opt_from(j, "eps_rate");
    m.omega = opt_from(j, "omega");
    m.tcer = opt_from(j, "tcer");
    m.ecer = opt_from(j, "ecer");
    m.peak_buy = num_from(j.at("peak_buy"));
    m.volume_buy = num_from(j.at("volume_buy"));
    return m;
}

/// Scalar fields of AnnualReport in emission order.
std::vector<std::pair<const char*, double AnnualReport::*>> annual_fields() {
    return {{"tac", &AnnualReport::tac},
            {"capex", &AnnualReport::capex},
            {"opex", &AnnualReport::opex},
            {"opex_rmi", &AnnualReport::opex_rmi},
            {"opex_eg_buy", &AnnualReport::opex_eg_buy},
            {"opex_eg_sell", &AnnualReport::opex_eg_sell},
            {"opex_eg_network_fee", &AnnualReport::opex_eg_network_fee},
            {"opex_wt_network_fee", &AnnualReport::opex_wt_network_fee},
            {"opex_ng", &AnnualReport::opex_ng},
            {"opex_ng_tax", &AnnualReport::opex_ng_tax},
            {"opex_dac", &AnnualReport::opex_dac},
            {"penalty", &AnnualReport::penalty},
            {"ce_scope1", &AnnualReport::ce_scope1},
            {"ce_scope2", &AnnualReport::ce_scope2},
            {"ce_removed", &AnnualReport::ce_removed},
            {"ce_net", &AnnualReport::ce_net},
            {"peak_buy", &AnnualReport::peak_buy},
            {"volume_buy", &AnnualReport::volume_buy},
            {"volume_sell", &AnnualReport::volume_sell}};
}

json to_json(const AnnualReport& a) {
    json j = json::object();
    for (const auto& [name, field] : annual_fields()) j[name] = num(a.*field);
    j["hp_mode_energy"] = a.hp_mode_energy;
    j["new_capacities"] = a.new_capacities;
    j["hourly"] = a.hourly;
    return j;
}

AnnualReport annual_from(const json& j) {
    AnnualReport a;
    for (const auto& [name, field] : annual_fields()) a.*field = num_from(j.at(name));
    a.hp_mode_energy = j.at("hp_mode_energy").get<std::map<std::string, double>>();
    a.new_capacities = j.at("new_capacities").get<std::map<std::string, double>>();
    a.hourly = j.at("hourly").get<std::map<std::string, std::vector<double>>>();
    return a;
}

json to_json(const BuildReport& b) {
    json modes = json::array();
    for (const auto& m : b.hp_modes) modes.push_back({{"source", m.source}, {"sink", m.sink}, {"cop", m.cop}});
    return {{"scenario", b.scenario},
            {"context", b.context},
            {"horizon", b.horizon},
            {"dt_hours", b.dt_hours},
            {"annual_weight", b.annual_weight},
            {"c_dac", b.c_dac},
            {"decarbonize", b.decarbonize},
            {"hp_modes", modes},
            {"variables_by_block", b.variables_by_block},
            {"constraints_by_block", b.constraints_by_block},
            {"num_variables", b.num_variables},
            {"num_constraints", b.num_constraints},
            {"num_binaries", b.num_binaries},
            {"warnings", b.warnings}};
}

BuildReport build_from(const json& j) {
    BuildReport b;
    b.scenario = j.at("scenario").get<std::string>();
    b.context = j.at("context").get<std::string>();
    b.horizon = j.at("horizon").get<std::size_t>();
    b.dt_hours = j.at("dt_hours").get<double>();
    b.annual_weight = j.at("annual_weight").get<double>();
    b.c_dac = j.at("c_dac").get<double>();
    b.decarbonize = j.at("decarbonize").get<bool>();
    for (const auto& m : j.at("hp_modes")) {
        b.hp_modes.push_back({m.at("source").get<std::string>(), m.at("sink").get<std::string>(),
                              m.at("cop").get<double>()});
    }
    b.variables_by_block = j.at("variables_by_block").get<std::map<std::string, std::size_t>>();
    b.constraints_by_block = j.at("constraints_by_block").get<std::map<std::string, std::size_t>>();
    b.num_variables = j.at("num_variables").get<std::size_t>();
    b.num_constraints = j.at("num_constraints").get<std::size_t>();
    b.num_binaries = j.at("num_binaries").get<std::size_t>();
    b.warnings = j.at("warnings").get<std::vector<std::string>>();
    return b;
}

json to_json(const ResidualReport& r) {
    return {{"max_constraint_violation", r.max_constraint_violation},
            {"worst_constraint", r.worst_constraint},
            {"max_bound_violation", r.max_bound_violation},
            {"worst_variable", r.worst_variable},
            {"max_integrality_violation", r.max_integrality_violation},
            {"violated_constraints", r.violated_constraints},
            {"objective_reported", num(r.objective_reported)},
            {"objective_recomputed", num(r.objective_recomputed)},
            {"objective_abs_error", num(r.objective_abs_error)},
            {"objective_rel_error", num(r.objective_rel_error)},
            {"feasible", r.feasible},
            {"objective_ok", r.objective_ok}};
}

ResidualReport residuals_from(const json& j) {
    ResidualReport r;
    r.max_constraint_violation = j.at("max_constraint_violation").get<double>();
    r.worst_constraint = j.at("worst_constraint").get<std::string>();
    r.max_bound_violation = j.at("max_bound_violation").get<double>();
    r.worst_variable = j.at("worst_variable").get<std::string>();
    r.max_integrality_violation = j.at("max_integrality_violation").get<double>();
    r.violated_constraints = j.at("violated_constraints").get<std::vector<std::string>>();
    r.objective_reported = num_from(j.at("objective_reported"));
    r.objective_recomputed = num_from(j.at("objective_recomputed"));
    r.objective_abs_error = num_from(j.at("objective_abs_error"));
    r.objective_rel_error = num_from(j.at("objective_rel_error"));
    r.feasible = j.at("feasible").get<bool>();
    r.objective_ok = j.at("objective_ok").get<bool>();
    return r;
}

json to_json(const FlowTable& f) {
    json rows = json::array();
    for (const auto& r : f.rows) rows.push_back({{"from", r.from}, {"to", r.to}, {"mwh", r.mwh}});
    return rows;
}

FlowTable flows_from(const json& j) {
    FlowTable f;
    for (const auto& r : j) f.rows.push_back({r.at("from").get<std::string>(), r.at("to").get<std::string>(),
                                              r.at("mwh").get<double>()});
    return f;
}

json to_json(const CellResult& c) {
    json j = {{"context", c.context},
              {"scenario", c.scenario},
              {"ok", c.ok},
              {"error_kind", c.error_kind},
              {"error", c.error},
              {"solve",
               {{"status", std::string(to_string(c.solve.status))},
                {"objective", num(c.solve.objective)},
                {"gap", num(c.solve.gap)},
                {"runtime_s", num(c.solve.runtime_s)},
                {"backend", c.solve.backend}}},
              {"ng_variables", c.ng_variables}};
    if (c.ok) {
        j["build"] = to_json(c.build);
        j["residuals"] = to_json(c.residuals);
        j["annual"] = to_json(c.annual);
        j["flows"] = to_json(c.flows);
        j["metrics"] = to_json(c.metrics);
    }
    return j;
}

CellResult cell_from(const json& j) {
    CellResult c;
    c.context = j.at("context").get<std::string>();
    c.scenario = j.at("scenario").get<std::string>();
    c.ok = j.at("ok").get<bool>();
    c.error_kind = j.at("error_kind").get<std::string>();
    c.error = j.at("error").get<std::string>();
    const auto& s = j.at("solve");
    c.solve.status = solve_status_from_string(s.at("status").get<std::string>());
    c.solve.objective = num_from(s.at("objective"));
    c.solve.gap = num_from(s.at("gap"));
    c.solve.runtime_s = num_from(s.at("runtime_s"));
    c.solve.backend = s.at("backend").get<std::string>();
    c.ng_variables = j.at("ng_variables").get<std::size_t>();
    if (c.ok) {
        c.build = build_from(j.at("build"));
        c.residuals = residuals_from(j.at("residuals"));
        c.annual = annual_from(j.at("annual"));
        c.flows = flows_from(j.at("flows"));
        c.metrics = metrics_from(j.at("metrics"));
    }
    return c;
}

json to_json(const StudyResult& s) {
    json cells = json::array(), pairs = json::array(), decarb = json::array(), pareto = json::array();
    for (const auto& c : s.cells) cells.push_back(to_json(c));
    for (const auto& p : s.pairs) {
        pairs.push_back({{"context", p.context},
                         {"scenario", p.scenario},
                         {"baseline", p.baseline},
                         {"defined", p.pair.defined},
                         {"ecer_pair", p.pair.defined ? json(p.pair.ecer_pair) : json(nullptr)},
                         {"omega_pair", p.pair.defined ? json(p.pair.omega_pair) : json(nullptr)}});
    }
    for (const auto& d : s.decarb) {
        decarb.push_back({{"context", d.context},
                          {"flex_level", d.flex_level},
                          {"tac_plain", d.tac_plain},
                          {"tac_decarb", d.tac_decarb},
                          {"cost", d.cost},
                          {"pct_vs_noflex", opt(d.pct_vs_noflex)}});
    }
    for (const auto& p : s.pareto) {
        pareto.push_back({{"context", p.context},
                          {"scenario", p.scenario},
                          {"tac", p.tac},
                          {"ce", p.ce},
                          {"tac_pct", opt(p.tac_pct)},
                          {"ce_pct", opt(p.ce_pct)},
                          {"tac_pct_d", opt(p.tac_pct_d)}});
    }
    return {{"schema", s.schema},       {"dataset_label", s.dataset_label}, {"horizon", s.horizon},
            {"dt_hours", s.dt_hours},   {"contexts", s.contexts},           {"scenarios", s.scenarios},
            {"cells", cells},           {"pairs", pairs},                   {"decarb", decarb},
            {"pareto", pareto},         {"notes", s.notes}};
}

}  // namespace

std::string study_to_json(const StudyResult& study) { return to_json(study).dump(2) + "\n"; }

StudyResult study_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("study file is not valid JSON: ") + e.what());
    }
    try {
        StudyResult s;
        s.schema = j.at("schema").get<std::string>();
        if (s.schema != kStudySchema) throw ValidationError("unsupported study schema '" + s.schema + "'");
        s.dataset_label = j.at("dataset_label").get<std::string>();
        s.horizon = j.at("horizon").get<std::size_t>();
        s.dt_hours = j.at("dt_hours").get<double>();
        s.contexts = j.at("contexts").get<std::vector<std::string>>();
        s.scenarios = j.at("scenarios").get<std::vector<std::string>>();
        for (const auto& c : j.at("cells")) s.cells.push_back(cell_from(c));
        for (const auto& p : j.at("pairs")) {
            PairRecord r{p.at("context").get<std::string>(), p.at("scenario").get<std::string>(),
                         p.at("baseline").get<std::string>(), {}};
            r.pair.defined = p.at("defined").get<bool>();
            if (r.pair.defined) {
                r.pair.ecer_pair = p.at("ecer_pair").get<double>();
                r.pair.omega_pair = p.at("omega_pair").get<double>();
            }
            s.pairs.push_back(r);
        }
        for (const auto& d : j.at("decarb")) {
            s.decarb.push_back({d.at("context").get<std::string>(), d.at("flex_level").get<std::string>(),
                                d.at("tac_plain").get<double>(), d.at("tac_decarb").get<double>(),
                                d.at("cost").get<double>(), opt_from(d, "pct_vs_noflex")});
        }
        for (const auto& p : j.at("pareto")) {
            s.pareto.push_back({p.at("context").get<std::string>(), p.at("scenario").get<std::string>(),
                                p.at("tac").get<double>(), p.at("ce").get<double>(), opt_from(p, "tac_pct"),
                                opt_from(p, "ce_pct"), opt_from(p, "tac_pct_d")});
        }
        s.notes = j.at("notes").get<std::vector<std::string>>();
        return s;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed study file: ") + e.what());
    }
}

StudyResult load_study(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return study_from_json(ss.str());
}

ReportFormat report_format_from_string(std::string_view s) {
    if (s == "json") return ReportFormat::Json;
    if (s == "csv-dir") return ReportFormat::CsvDir;
    throw InvalidParameter("unknown report format '" + std::string(s) + "' (json, csv-dir)");
}

// -----------------------------------------------------------------------------
// CSV
// -----------------------------------------------------------------------------

namespace {

std::string cell_text(double v) {
    if (!std::isfinite(v)) return "";
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}
std::string cell_text(const std::optional<double>& v) { return v ? cell_text(*v) : ""; }
std::string cell_text(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}
std::string cell_text(const char* s) { return cell_text(std::string(s)); }
std::string cell_text(bool b) { return b ? "true" : "false"; }
std::string cell_text(std::size_t n) { return std::to_string(n); }

class Csv {
public:
    Csv(const std::filesystem::path& path, std::initializer_list<const char*> header) : out_(path, std::ios::binary) {
        if (!out_) throw IoError("cannot write " + path.string());
        bool first = true;
        for (const char* h : header) {
            out_ << (first ? "" : ",") << h;
            first = false;
        }
        out_ << '\n';
    }
    template <typename... Ts>
    void row(const Ts&... cells) {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell_text(cells), first = false), ...);
        out_ << '\n';
    }
    ~Csv() = default;

private:
    std::ofstream out_;
};

void emit_csv_dir(const StudyResult& s, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    {
        std::ofstream meta(dir / "study.json", std::ios::binary);
        if (!meta) throw IoError("cannot write " + (dir / "study.json").string());
        meta << json{{"schema", s.schema},     {"dataset_label", s.dataset_label}, {"horizon", s.horizon},
                     {"dt_hours", s.dt_hours}, {"contexts", s.contexts},           {"scenarios", s.scenarios},
                     {"notes", s.notes}}
                    .dump(2)
             << '\n';
    }
    Csv cells(dir / "cells.csv", {"context", "scenario", "ok", "status", "objective", "gap", "runtime_s",
                                  "num_variables", "num_constraints", "num_binaries", "ng_variables",
                                  "max_violation", "error_kind", "error"});
    for (const auto& c : s.cells) {
        cells.row(c.context, c.scenario, c.ok, std::string(to_string(c.solve.status)), c.solve.objective, c.solve.gap,
                  c.solve.runtime_s, c.build.num_variables, c.build.num_constraints, c.build.num_binaries,
                  c.ng_variables, c.residuals.max_constraint_violation, c.error_kind, c.error);
    }
    Csv annual(dir / "annual.csv", {"context", "scenario", "quantity", "value"});
    Csv metrics(dir / "metrics.csv", {"context", "scenario", "metric", "value"});
    Csv caps(dir / "capacities.csv", {"context", "scenario", "component", "new_capacity"});
    Csv modes(dir / "hp_modes.csv", {"context", "scenario", "mode", "mwh"});
    Csv flows(dir / "flows.csv", {"context", "scenario", "from", "to", "mwh"});
    Csv hourly(dir / "hourly.csv", {"context", "scenario", "series", "t", "kw"});
    for (const auto& c : s.cells) {
        if (!c.ok) continue;
        for (const auto& [name, field] : annual_fields()) annual.row(c.context, c.scenario, name, c.annual.*field);
        const auto mj = to_json(c.metrics);
        for (auto it = mj.begin(); it != mj.end(); ++it) {
            metrics.row(c.context, c.scenario, it.key(),
                        it.value().is_null() ? std::optional<double>{} : it.value().get<double>());
        }
        for (const auto& [comp, v] : c.annual.new_capacities) caps.row(c.context, c.scenario, comp, v);
        for (const auto& [mode, v] : c.annual.hp_mode_energy) modes.row(c.context, c.scenario, mode, v);
        for (const auto& f : c.flows.rows) flows.row(c.context, c.scenario, f.from, f.to, f.mwh);
        for (const auto& [series, values] : c.annual.hourly) {
            for (std::size_t t = 0; t < values.size(); ++t) hourly.row(c.context, c.scenario, series, t, values[t]);
        }
    }
    Csv pareto(dir / "pareto.csv", {"context", "scenario", "tac", "ce", "tac_pct", "ce_pct", "tac_pct_d"});
    for (const auto& p : s.pareto) pareto.row(p.context, p.scenario, p.tac, p.ce, p.tac_pct, p.ce_pct, p.tac_pct_d);
    Csv pairs(dir / "pairs.csv", {"context", "scenario", "baseline", "defined", "ecer_pair", "omega_pair"});
    for (const auto& p : s.pairs) {
        pairs.row(p.context, p.scenario, p.baseline, p.pair.defined,
                  p.pair.defined ? std::optional<double>(p.pair.ecer_pair) : std::nullopt,
                  p.pair.defined ? std::optional<double>(p.pair.omega_pair) : std::nullopt);
    }
    Csv decarb(dir / "decarb.csv", {"context", "flex_level", "tac_plain", "tac_decarb", "cost", "pct_vs_noflex"});
    for (const auto& d : s.decarb) decarb.row(d.context, d.flex_level, d.tac_plain, d.tac_decarb, d.cost, d.pct_vs_noflex);
}

}  // namespace

std::vector<std::string> csv_table_names() {
    return {"cells", "annual", "metrics", "capacities", "hp_modes", "flows", "hourly", "pareto", "pairs", "decarb"};
}

void emit(const StudyResult& study, ReportFormat format, const std::filesystem::path& path) {
    if (format == ReportFormat::CsvDir) {
        emit_csv_dir(study, path);
        return;
    }
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << study_to_json(study);
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace flexopt
