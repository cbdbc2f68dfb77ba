#include "flexopt/solver_backend.hpp"

#include <Highs.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

namespace flexopt {

std::string_view to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::FeasibleGap: return "feasible-gap";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::Timeout: return "timeout";
    }
    return "?";
}

SolveStatus solve_status_from_string(std::string_view s) {
    for (auto st : {SolveStatus::Optimal, SolveStatus::FeasibleGap, SolveStatus::Infeasible, SolveStatus::Unbounded,
                    SolveStatus::Timeout}) {
        if (to_string(st) == s) return st;
    }
    throw InvalidParameter("unknown solve status '" + std::string(s) + "'");
}

void SolveOptions::validate() const {
    if (!(mip_gap >= 0.0)) throw InvalidParameter("mip_gap must be >= 0");
    if (!(time_limit_s > 0.0)) throw InvalidParameter("time_limit_s must be > 0");
    if (threads < 1) throw InvalidParameter("threads must be >= 1");
}

double SolveResult::value(const ModelInstance& model, const VarKey& key) const {
    if (!has_values()) throw SolverError("no solution values (status " + std::string(to_string(status)) + ")");
    return values.at(model.var(key));
}

std::map<std::string, double> named_values(const ModelInstance& model, const SolveResult& result) {
    std::map<std::string, double> out;
    if (!result.has_values()) return out;
    const auto& vars = model.variables();
    for (std::size_t j = 0; j < vars.size(); ++j) out.emplace(vars[j].name, result.values.at(j));
    return out;
}

// -----------------------------------------------------------------------------
// HiGHS
// -----------------------------------------------------------------------------

namespace {

HighsLp to_highs(const ModelInstance& model) {
    HighsLp lp;
    const auto& vars = model.variables();
    const auto& rows = model.constraints();
    lp.num_col_ = static_cast<HighsInt>(vars.size());
    lp.num_row_ = static_cast<HighsInt>(rows.size());
    lp.sense_ = ObjSense::kMinimize;
    lp.offset_ = model.objective_constant();
    lp.col_cost_ = model.objective();
    lp.col_lower_.reserve(vars.size());
    lp.col_upper_.reserve(vars.size());
    bool any_integer = false;
    for (const auto& v : vars) {
        lp.col_lower_.push_back(v.lower);
        lp.col_upper_.push_back(v.upper);
        any_integer = any_integer || v.type == VarType::Binary;
    }
    if (any_integer) {
        lp.integrality_.reserve(vars.size());
        for (const auto& v : vars) {
            lp.integrality_.push_back(v.type == VarType::Binary ? HighsVarType::kInteger
                                                                : HighsVarType::kContinuous);
        }
    }
    lp.row_lower_.reserve(rows.size());
    lp.row_upper_.reserve(rows.size());
    std::vector<HighsInt> count(vars.size() + 1, 0);
    for (const auto& c : rows) {
        lp.row_lower_.push_back(c.sense == Sense::LessEqual ? -kHighsInf : c.rhs);
        lp.row_upper_.push_back(c.sense == Sense::GreaterEqual ? kHighsInf : c.rhs);
        for (const auto& t : c.terms) ++count[t.var + 1];
    }
    auto& a = lp.a_matrix_;
    a.format_ = MatrixFormat::kColwise;
    a.num_col_ = lp.num_col_;
    a.num_row_ = lp.num_row_;
    a.start_.assign(vars.size() + 1, 0);
    for (std::size_t j = 0; j < vars.size(); ++j) a.start_[j + 1] = a.start_[j] + count[j + 1];
    a.index_.resize(static_cast<std::size_t>(a.start_.back()));
    a.value_.resize(a.index_.size());
    std::vector<HighsInt> next(a.start_.begin(), a.start_.end() - 1);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (const auto& t : rows[i].terms) {
            const auto k = static_cast<std::size_t>(next[t.var]++);
            a.index_[k] = static_cast<HighsInt>(i);
            a.value_[k] = t.coef;
        }
    }
    return lp;
}

void set_option(Highs& h, const std::string& name, auto value) {
    if (h.setOptionValue(name, value) != HighsStatus::kOk) {
        throw SolverError("HiGHS rejected option " + name);
    }
}

class HighsBackend final : public SolverBackend {
public:
    std::string name() const override { return "highs"; }

    SolveResult solve(const ModelInstance& model, const SolveOptions& options) const override {
        options.validate();
        model.validate();
        SolveResult r;
        r.backend = name();
        const auto t0 = std::chrono::steady_clock::now();
        auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

        if (model.num_variables() == 0) {
            r.status = SolveStatus::Optimal;
            r.objective = model.objective_constant();
            r.runtime_s = elapsed();
            return r;
        }

        Highs h;
        set_option(h, "output_flag", options.verbose);
        set_option(h, "mip_rel_gap", options.mip_gap);
        set_option(h, "random_seed", static_cast<HighsInt>(options.seed));
        set_option(h, "threads", static_cast<HighsInt>(options.threads));
        if (std::isfinite(options.time_limit_s)) set_option(h, "time_limit", options.time_limit_s);
        if (h.passModel(to_highs(model)) == HighsStatus::kError) throw SolverError("HiGHS could not load the model");

        if (h.run() == HighsStatus::kError) throw SolverError("HiGHS failed to solve the model");
        const auto& info = h.getInfo();
        const bool has_solution = info.primal_solution_status == kSolutionStatusFeasible;
        const bool is_mip = model.num_binaries() > 0;

        switch (h.getModelStatus()) {
            case HighsModelStatus::kOptimal:
                r.status = SolveStatus::Optimal;
                break;
            case HighsModelStatus::kInfeasible:
                r.status = SolveStatus::Infeasible;
                break;
            case HighsModelStatus::kUnbounded:
            case HighsModelStatus::kUnboundedOrInfeasible:
                r.status = SolveStatus::Unbounded;
                break;
            case HighsModelStatus::kTimeLimit:
            case HighsModelStatus::kIterationLimit:
            case HighsModelStatus::kSolutionLimit:
            case HighsModelStatus::kInterrupt:
                r.status = has_solution ? SolveStatus::FeasibleGap : SolveStatus::Timeout;
                break;
            default:
                throw SolverError("HiGHS ended with status " + h.modelStatusToString(h.getModelStatus()));
        }
        r.runtime_s = elapsed();
        if (r.has_values()) {
            if (!has_solution) throw SolverError("HiGHS reported success without a primal solution");
            r.values = h.getSolution().col_value;
            r.objective = info.objective_function_value;
            r.gap = is_mip ? std::max(0.0, info.mip_gap) : 0.0;
            if (r.status == SolveStatus::Optimal && is_mip && r.gap > options.mip_gap + 1e-12 &&
                std::abs(info.mip_dual_bound - r.objective) > 1e-6) {
                r.status = SolveStatus::FeasibleGap;
            }
        }
        return r;
    }
};

}  // namespace

std::vector<std::string> available_backends() { return {"highs"}; }

std::unique_ptr<SolverBackend> make_backend(std::string_view name) {
    if (name == "highs") return std::make_unique<HighsBackend>();
    std::string known;
    for (const auto& b : available_backends()) known += (known.empty() ? "" : ", ") + b;
    throw SolverError("solver backend '" + std::string(name) + "' is not available (built: " + known + ")");
}

std::unique_ptr<SolverBackend> default_backend() {
    const char* env = std::getenv("FLEXOPT_SOLVER");
    return make_backend(env && *env ? env : "highs");
}

SolveResult solve(const ModelInstance& model, const SolveOptions& options) {
    return default_backend()->solve(model, options);
}

// -----------------------------------------------------------------------------
// MPS
// -----------------------------------------------------------------------------

namespace {

std::string numbered(char prefix, std::size_t index) {
    if (index >= 9'999'999) throw BuildError("model too large for 8-character MPS names");
    char buf[16];
    std::snprintf(buf, sizeof buf, "%c%07zu", prefix, index + 1);
    return buf;
}

/// Shortest round-trip decimal if it fits 12 characters, else the most precise %g that does.
std::string mps_number(double x) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec == std::errc() && end - buf <= 12) return std::string(buf, end);
    for (int prec = 12; prec > 0; --prec) {
        const int n = std::snprintf(buf, sizeof buf, "%.*g", prec, x);
        if (n <= 12) return std::string(buf, static_cast<std::size_t>(n));
    }
    throw IoError("cannot fit number into an MPS field");
}

// Field layout: 2-3 type, 5-12 name, 15-22 name, 25-36 value, 40-47 name, 50-61 value.
std::string entry(std::string_view type, std::string_view name1, std::string_view name2 = {},
                  std::string_view v1 = {}, std::string_view name3 = {}, std::string_view v2 = {}) {
    std::string line(61, ' ');
    auto put = [&](std::size_t col, std::string_view s) { line.replace(col - 1, s.size(), s); };
    put(2, type);
    put(5, name1);
    put(15, name2);
    put(25, v1);
    put(40, name3);
    put(50, v2);
    while (!line.empty() && line.back() == ' ') line.pop_back();
    return line;
}

}  // namespace

std::string mps_column_name(std::size_t index) { return numbered('C', index); }
std::string mps_row_name(std::size_t index) { return numbered('R', index); }

void export_mps(const ModelInstance& model, const std::filesystem::path& path) {
    model.validate();
    const auto& vars = model.variables();
    const auto& rows = model.constraints();

    // Column-wise view of the constraint matrix.
    std::vector<std::vector<std::pair<std::size_t, double>>> cols(vars.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (const auto& t : rows[i].terms) cols[t.var].emplace_back(i, t.coef);
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());

    out << "NAME          FLEXOPT\n";
    out << "ROWS\n";
    out << entry("N", "OBJ") << '\n';
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const char* type = rows[i].sense == Sense::LessEqual ? "L" : rows[i].sense == Sense::Equal ? "E" : "G";
        out << entry(type, mps_row_name(i)) << '\n';
    }

    out << "COLUMNS\n";
    bool in_int = false;
    int marker = 0;
    auto set_marker = [&](bool want_int) {
        if (want_int == in_int) return;
        char name[16];
        std::snprintf(name, sizeof name, "MARKER%02d", marker++ % 100);
        out << entry("", name, "'MARKER'", "", want_int ? "'INTORG'" : "'INTEND'") << '\n';
        in_int = want_int;
    };
    const auto& obj = model.objective();
    for (std::size_t j = 0; j < vars.size(); ++j) {
        set_marker(vars[j].type == VarType::Binary);
        const std::string cname = mps_column_name(j);
        std::vector<std::pair<std::string, double>> items;
        if (obj[j] != 0.0 || cols[j].empty()) items.emplace_back("OBJ", obj[j]);
        for (const auto& [row, coef] : cols[j]) items.emplace_back(mps_row_name(row), coef);
        for (std::size_t k = 0; k < items.size(); k += 2) {
            if (k + 1 < items.size()) {
                out << entry("", cname, items[k].first, mps_number(items[k].second), items[k + 1].first,
                             mps_number(items[k + 1].second))
                    << '\n';
            } else {
                out << entry("", cname, items[k].first, mps_number(items[k].second)) << '\n';
            }
        }
    }
    set_marker(false);

    out << "RHS\n";
    if (model.objective_constant() != 0.0) {
        out << entry("", "RHS", "OBJ", mps_number(-model.objective_constant())) << '\n';
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].rhs != 0.0) out << entry("", "RHS", mps_row_name(i), mps_number(rows[i].rhs)) << '\n';
    }

    out << "BOUNDS\n";
    for (std::size_t j = 0; j < vars.size(); ++j) {
        const auto& v = vars[j];
        const std::string cname = mps_column_name(j);
        if (v.type == VarType::Binary) {
            if (v.lower == 0.0 && v.upper == 1.0) {
                out << entry("BV", "BND", cname) << '\n';
            } else {
                out << entry("LO", "BND", cname, mps_number(v.lower)) << '\n';
                out << entry("UP", "BND", cname, mps_number(v.upper)) << '\n';
            }
            continue;
        }
        if (v.lower == v.upper) {
            out << entry("FX", "BND", cname, mps_number(v.lower)) << '\n';
            continue;
        }
        const bool lo_inf = std::isinf(v.lower);
        const bool up_inf = std::isinf(v.upper);
        if (lo_inf && up_inf) {
            out << entry("FR", "BND", cname) << '\n';
            continue;
        }
        if (lo_inf) {
            out << entry("MI", "BND", cname) << '\n';
        } else if (v.lower != 0.0) {
            out << entry("LO", "BND", cname, mps_number(v.lower)) << '\n';
        }
        if (!up_inf) out << entry("UP", "BND", cname, mps_number(v.upper)) << '\n';
    }
    out << "ENDATA\n";
    if (!out) throw IoError("failed writing " + path.string());
}

MpsSummary read_mps_reference(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IoError("no such file " + path.string());
    Highs h;
    h.setOptionValue("output_flag", false);
    if (h.readModel(path.string()) == HighsStatus::kError) throw IoError("reference reader rejected " + path.string());
    const HighsLp& lp = h.getLp();
    MpsSummary s;
    s.num_variables = static_cast<std::size_t>(lp.num_col_);
    s.num_constraints = static_cast<std::size_t>(lp.num_row_);
    s.num_nonzeros = static_cast<std::size_t>(lp.a_matrix_.numNz());
    s.integrality.assign(s.num_variables, false);
    for (std::size_t j = 0; j < lp.integrality_.size(); ++j) {
        s.integrality[j] = lp.integrality_[j] == HighsVarType::kInteger;
    }
    s.objective_offset = lp.offset_;
    return s;
}

MpsSummary summarize(const ModelInstance& model) {
    MpsSummary s;
    s.num_variables = model.num_variables();
    s.num_constraints = model.num_constraints();
    s.num_nonzeros = model.num_nonzeros();
    for (const auto& v : model.variables()) s.integrality.push_back(v.type == VarType::Binary);
    s.objective_offset = model.objective_constant();
    return s;
}

// -----------------------------------------------------------------------------
// Verification
// -----------------------------------------------------------------------------

ResidualReport verify_solution(const ModelInstance& model, const SolveResult& result, const VerifyTolerances& tol) {
    if (!result.has_values()) throw SolverError("cannot verify a solve without values");
    if (result.values.size() != model.num_variables()) {
        throw SolverError("solution has " + std::to_string(result.values.size()) + " values for " +
                          std::to_string(model.num_variables()) + " variables");
    }
    ResidualReport rep;
    rep.feasible = true;
    const auto& x = result.values;
    const auto& vars = model.variables();
    for (std::size_t j = 0; j < vars.size(); ++j) {
        if (!std::isfinite(x[j])) throw SolverError("missing value for " + vars[j].name);
        const double viol = std::max({0.0, vars[j].lower - x[j], x[j] - vars[j].upper});
        if (viol > rep.max_bound_violation) {
            rep.max_bound_violation = viol;
            rep.worst_variable = vars[j].name;
        }
        if (viol > std::max(tol.abs, tol.rel * std::abs(x[j]))) rep.feasible = false;
        if (vars[j].type == VarType::Binary) {
            const double frac = std::abs(x[j] - std::round(x[j]));
            rep.max_integrality_violation = std::max(rep.max_integrality_violation, frac);
            if (frac > tol.abs) rep.feasible = false;
        }
    }
    std::vector<std::pair<double, std::size_t>> bad;
    const auto& rows = model.constraints();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double a = model.activity(i, x);
        double viol = 0.0;
        switch (rows[i].sense) {
            case Sense::LessEqual: viol = std::max(0.0, a - rows[i].rhs); break;
            case Sense::GreaterEqual: viol = std::max(0.0, rows[i].rhs - a); break;
            case Sense::Equal: viol = std::abs(a - rows[i].rhs); break;
        }
        if (viol > rep.max_constraint_violation) {
            rep.max_constraint_violation = viol;
            rep.worst_constraint = rows[i].name;
        }
        double scale = std::abs(rows[i].rhs);
        for (const auto& t : rows[i].terms) scale = std::max(scale, std::abs(t.coef * x[t.var]));
        if (viol > std::max(tol.abs, tol.rel * scale)) bad.emplace_back(viol, i);
    }
    if (!bad.empty()) {
        rep.feasible = false;
        std::sort(bad.begin(), bad.end(), [](const auto& l, const auto& r) { return l.first > r.first; });
        for (std::size_t k = 0; k < std::min<std::size_t>(bad.size(), 10); ++k) {
            rep.violated_constraints.push_back(rows[bad[k].second].name);
        }
    }
    rep.objective_reported = result.objective;
    rep.objective_recomputed = model.evaluate_objective(x);
    rep.objective_abs_error = std::abs(rep.objective_reported - rep.objective_recomputed);
    rep.objective_rel_error = rep.objective_abs_error / std::max(1.0, std::abs(rep.objective_recomputed));
    rep.objective_ok = rep.objective_rel_error <= tol.objective_rel;
    return rep;
}

SolveComparison compare_solves(const SolveResult& a, const SolveResult& b, double obj_tol, double value_tol) {
    SolveComparison c;
    c.same_status = a.status == b.status;
    const double scale = std::max({1.0, std::abs(a.objective), std::abs(b.objective)});
    c.same_objective = std::abs(a.objective - b.objective) <= obj_tol * scale;
    c.same_values = a.values.size() == b.values.size();
    for (std::size_t j = 0; c.same_values && j < a.values.size(); ++j) {
        c.same_values = std::abs(a.values[j] - b.values[j]) <= value_tol * std::max(1.0, std::abs(a.values[j]));
    }
    return c;
}

}  // namespace flexopt
