#pragma once

// MILP solving contract, fixed-form MPS export and independent solution checks.

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "flexopt/model.hpp"

namespace flexopt {

enum class SolveStatus { Optimal, FeasibleGap, Infeasible, Unbounded, Timeout };

std::string_view to_string(SolveStatus s);
SolveStatus solve_status_from_string(std::string_view s);

struct SolveOptions {
    double mip_gap = 0.0;             ///< relative gap
    double time_limit_s = kInf;
    int threads = 1;
    int seed = 0;
    bool verbose = false;

    void validate() const;
};

struct SolveResult {
    SolveStatus status = SolveStatus::Infeasible;
    double objective = 0.0;
    std::vector<double> values;       ///< indexed like ModelInstance::variables()
    double gap = 0.0;
    double runtime_s = 0.0;
    std::string backend;

    bool has_values() const noexcept {
        return status == SolveStatus::Optimal || status == SolveStatus::FeasibleGap;
    }
    double value(const ModelInstance& model, const VarKey& key) const;
};

/// Variable name -> value.
std::map<std::string, double> named_values(const ModelInstance& model, const SolveResult& result);

class SolverBackend {
public:
    virtual ~SolverBackend() = default;
    virtual std::string name() const = 0;
    /// Each call owns its own solver session.
    virtual SolveResult solve(const ModelInstance& model, const SolveOptions& options) const = 0;
};

/// Backends compiled into this build.
std::vector<std::string> available_backends();
/// Throws SolverError for unknown or unavailable names.
std::unique_ptr<SolverBackend> make_backend(std::string_view name);
/// Backend named by FLEXOPT_SOLVER, "highs" when unset.
std::unique_ptr<SolverBackend> default_backend();

SolveResult solve(const ModelInstance& model, const SolveOptions& options = {});

// -----------------------------------------------------------------------------
// MPS
// -----------------------------------------------------------------------------
//
// Fixed-form MPS with generated 8-character names: columns C0000001.., rows
// R0000001.. in model order, objective row OBJ. The objective constant c is
// written as RHS -c on the objective row. Binaries sit between INTORG/INTEND
// markers and carry explicit 0/1 bounds. Numbers use the shortest decimal form
// that fits the 12-character field.

std::string mps_column_name(std::size_t index);
std::string mps_row_name(std::size_t index);

void export_mps(const ModelInstance& model, const std::filesystem::path& path);

/// Structure of a model as seen by the reference MPS reader.
struct MpsSummary {
    std::size_t num_variables = 0;
    std::size_t num_constraints = 0;
    std::size_t num_nonzeros = 0;
    std::vector<bool> integrality;    ///< per column
    double objective_offset = 0.0;
};

/// Reads an MPS file with the solver's own reader.
MpsSummary read_mps_reference(const std::filesystem::path& path);
MpsSummary summarize(const ModelInstance& model);

// -----------------------------------------------------------------------------
// Verification
// -----------------------------------------------------------------------------

struct VerifyTolerances {
    double abs = 1e-6;               ///< absolute violation accepted on any row or bound
    double rel = 1e-9;               ///< or this share of the row's largest term, whichever is larger
    double objective_rel = 1e-6;
};

struct ResidualReport {
    double max_constraint_violation = 0.0;
    std::string worst_constraint;
    double max_bound_violation = 0.0;
    std::string worst_variable;
    double max_integrality_violation = 0.0;
    /// Rows whose violation exceeds the tolerance, worst first (at most 10).
    std::vector<std::string> violated_constraints;
    double objective_reported = 0.0;
    double objective_recomputed = 0.0;
    double objective_abs_error = 0.0;
    double objective_rel_error = 0.0;
    bool feasible = false;
    bool objective_ok = false;

    bool ok() const noexcept { return feasible && objective_ok; }
};

/// Substitutes `result.values` back into every row and bound.
ResidualReport verify_solution(const ModelInstance& model, const SolveResult& result,
                               const VerifyTolerances& tol = {});

/// Two solves of one model: equal objective but different values means alternate optima.
struct SolveComparison {
    bool same_status = false;
    bool same_objective = false;
    bool same_values = false;
    bool degenerate() const noexcept { return same_status && same_objective && !same_values; }
};

SolveComparison compare_solves(const SolveResult& a, const SolveResult& b, double obj_tol = 1e-9,
                               double value_tol = 1e-9);

}  // namespace flexopt
