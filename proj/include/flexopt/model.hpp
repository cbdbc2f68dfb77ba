#pragma once

// Solver-agnostic MILP container: variables with bounds and integrality,
// named linear constraints and a linear objective (always minimised).

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "flexopt/core_types.hpp"

namespace flexopt {

enum class Sense { LessEqual, Equal, GreaterEqual };
enum class VarType { Continuous, Binary };

/// Registry key of a decision variable: symbol plus optional component, mode and time index.
struct VarKey {
    std::string symbol;
    std::string component;
    std::string mode;
    int t = -1;

    /// "symbol[component,mode,t]" with empty parts left out.
    std::string name() const;
    auto operator<=>(const VarKey&) const = default;
};

struct Variable {
    std::string name;
    double lower = 0.0;
    double upper = kInf;
    VarType type = VarType::Continuous;
    std::string block;
};

struct Term {
    std::size_t var = 0;
    double coef = 0.0;
};

struct Constraint {
    std::string name;
    std::vector<Term> terms;
    Sense sense = Sense::Equal;
    double rhs = 0.0;
    std::string block;
};

class ModelInstance {
public:
    /// Adds a variable; throws BuildError if the key is already registered.
    std::size_t add_variable(const VarKey& key, double lower, double upper, VarType type = VarType::Continuous,
                             const std::string& block = {});
    /// Adds a constraint; duplicate terms on the same variable are merged.
    std::size_t add_constraint(std::string name, std::vector<Term> terms, Sense sense, double rhs,
                               const std::string& block = {});
    void add_objective(std::size_t var, double coef);
    void add_objective_constant(double c) { objective_constant_ += c; }

    std::optional<std::size_t> find(const VarKey& key) const;
    /// Throws BuildError when missing.
    std::size_t var(const VarKey& key) const;
    std::optional<std::size_t> find_by_name(const std::string& name) const;
    const VarKey& key_of(std::size_t var) const { return keys_.at(var); }
    /// All registered keys with the given symbol and component, ordered by (mode, t).
    std::vector<std::pair<VarKey, std::size_t>> select(const std::string& symbol, const std::string& component) const;

    void set_bounds(std::size_t var, double lower, double upper);

    const std::vector<Variable>& variables() const noexcept { return variables_; }
    const std::vector<Constraint>& constraints() const noexcept { return constraints_; }
    const std::vector<double>& objective() const noexcept { return objective_; }
    double objective_constant() const noexcept { return objective_constant_; }

    std::size_t num_variables() const noexcept { return variables_.size(); }
    std::size_t num_constraints() const noexcept { return constraints_.size(); }
    std::size_t num_nonzeros() const;
    std::size_t num_binaries() const;

    /// Checks references, bounds and name uniqueness; throws BuildError.
    void validate() const;

    /// sum_j c_j x_j + constant.
    double evaluate_objective(const std::vector<double>& x) const;
    double activity(std::size_t row, const std::vector<double>& x) const;

private:
    std::vector<Variable> variables_;
    std::vector<VarKey> keys_;
    std::map<VarKey, std::size_t> registry_;
    std::unordered_map<std::string, std::size_t> by_name_;
    std::vector<Constraint> constraints_;
    std::vector<double> objective_;
    double objective_constant_ = 0.0;
};

}  // namespace flexopt
