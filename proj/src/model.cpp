#include "flexopt/model.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace flexopt {

std::string VarKey::name() const {
    std::string n = symbol;
    std::vector<std::string> parts;
    if (!component.empty()) parts.push_back(component);
    if (!mode.empty()) parts.push_back(mode);
    if (t >= 0) parts.push_back(std::to_string(t));
    if (!parts.empty()) {
        n += '[';
        for (std::size_t i = 0; i < parts.size(); ++i) {
            if (i) n += ',';
            n += parts[i];
        }
        n += ']';
    }
    return n;
}

std::size_t ModelInstance::add_variable(const VarKey& key, double lower, double upper, VarType type,
                                        const std::string& block) {
    if (registry_.contains(key)) throw BuildError("duplicate variable " + key.name());
    if (lower > upper) throw BuildError("variable " + key.name() + " has lower bound above upper bound");
    const std::size_t idx = variables_.size();
    std::string name = key.name();
    if (by_name_.contains(name)) throw BuildError("duplicate variable name " + name);
    by_name_.emplace(name, idx);
    if (type == VarType::Binary) {
        lower = std::max(lower, 0.0);
        upper = std::min(upper, 1.0);
    }
    variables_.push_back({std::move(name), lower, upper, type, block});
    keys_.push_back(key);
    registry_.emplace(key, idx);
    objective_.push_back(0.0);
    return idx;
}

std::size_t ModelInstance::add_constraint(std::string name, std::vector<Term> terms, Sense sense, double rhs,
                                          const std::string& block) {
    std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
    std::vector<Term> merged;
    merged.reserve(terms.size());
    for (const Term& t : terms) {
        if (t.var >= variables_.size()) throw BuildError("constraint " + name + " references unknown variable");
        if (!merged.empty() && merged.back().var == t.var) {
            merged.back().coef += t.coef;
        } else {
            merged.push_back(t);
        }
    }
    std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
    constraints_.push_back({std::move(name), std::move(merged), sense, rhs, block});
    return constraints_.size() - 1;
}

void ModelInstance::add_objective(std::size_t var, double coef) {
    if (var >= variables_.size()) throw BuildError("objective references unknown variable");
    objective_[var] += coef;
}

std::optional<std::size_t> ModelInstance::find(const VarKey& key) const {
    auto it = registry_.find(key);
    if (it == registry_.end()) return std::nullopt;
    return it->second;
}

std::size_t ModelInstance::var(const VarKey& key) const {
    auto idx = find(key);
    if (!idx) throw BuildError("unknown variable " + key.name());
    return *idx;
}

std::optional<std::size_t> ModelInstance::find_by_name(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::pair<VarKey, std::size_t>> ModelInstance::select(const std::string& symbol,
                                                                  const std::string& component) const {
    std::vector<std::pair<VarKey, std::size_t>> out;
    auto it = registry_.lower_bound(VarKey{symbol, component, "", -1});
    for (; it != registry_.end() && it->first.symbol == symbol && it->first.component == component; ++it) {
        out.emplace_back(it->first, it->second);
    }
    return out;
}

void ModelInstance::set_bounds(std::size_t var, double lower, double upper) {
    if (lower > upper) throw BuildError("set_bounds: lower above upper for " + variables_.at(var).name);
    variables_.at(var).lower = lower;
    variables_.at(var).upper = upper;
}

std::size_t ModelInstance::num_nonzeros() const {
    std::size_t n = 0;
    for (const auto& c : constraints_) n += c.terms.size();
    return n;
}

std::size_t ModelInstance::num_binaries() const {
    return static_cast<std::size_t>(std::count_if(variables_.begin(), variables_.end(),
                                                  [](const Variable& v) { return v.type == VarType::Binary; }));
}

void ModelInstance::validate() const {
    std::unordered_set<std::string> row_names;
    for (const auto& c : constraints_) {
        if (!row_names.insert(c.name).second) throw BuildError("duplicate constraint name " + c.name);
        if (!std::isfinite(c.rhs)) throw BuildError("constraint " + c.name + " has non-finite rhs");
        for (const auto& t : c.terms) {
            if (t.var >= variables_.size()) throw BuildError("constraint " + c.name + " references unknown variable");
            if (!std::isfinite(t.coef)) throw BuildError("constraint " + c.name + " has non-finite coefficient");
        }
    }
    for (const auto& v : variables_) {
        if (v.lower > v.upper) throw BuildError("variable " + v.name + " has crossed bounds");
    }
    for (double c : objective_) {
        if (!std::isfinite(c)) throw BuildError("objective has non-finite coefficient");
    }
}

double ModelInstance::evaluate_objective(const std::vector<double>& x) const {
    std::vector<double> terms;
    terms.reserve(objective_.size() + 1);
    for (std::size_t j = 0; j < objective_.size(); ++j) {
        if (objective_[j] != 0.0) terms.push_back(objective_[j] * x.at(j));
    }
    terms.push_back(objective_constant_);
    return compensated_sum(terms);
}

double ModelInstance::activity(std::size_t row, const std::vector<double>& x) const {
    const auto& c = constraints_.at(row);
    std::vector<double> terms;
    terms.reserve(c.terms.size());
    for (const auto& t : c.terms) terms.push_back(t.coef * x.at(t.var));
    return compensated_sum(terms);
}

}  // namespace flexopt
