#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cvp/kernels.hpp"
#include "cvp/measure.hpp"
#include "cvp/solver.hpp"
#include "cvp/space.hpp"

namespace cvp {

struct LevelOutcome {
    int level = 1;
    std::optional<LevelSolution> solution;
    std::optional<DiscreteMeasure> extended;  // solution measure lifted to the top level
    std::string error;

    bool ok() const noexcept { return solution.has_value(); }
};

struct PhiRow {
    int member_id = 0;
    std::vector<double> sequence;  // rho^(k)(D), one entry per successful level
    double phi_hat = 0.0;
    double tail_osc = 0.0;
    double c_k_bound = 0.0;
    bool stabilized = true;
};

/// Finite-resolution set function: level sequences on every family member.
struct PhiTable {
    std::vector<int> levels;  // successful levels, increasing
    int tail_window = 1;
    std::vector<PhiRow> rows;  // indexed like family.members

    double phi_hat(std::size_t member) const { return rows.at(member).phi_hat; }
};

/// Lower bound on the bounded-Lipschitz distance between consecutive level
/// measures restricted to a member, from the constant function and unit tents
/// at every atom.
struct ConvergenceTrace {
    int member_id = 0;
    std::vector<int> from_level;
    std::vector<int> to_level;
    std::vector<double> discrepancy;
};

struct Construction {
    std::vector<LevelOutcome> levels;
    PhiTable phi;
    int max_level = 1;
    std::vector<ConvergenceTrace> traces;

    std::vector<const LevelSolution*> successful() const;
    /// Extended measure of the last successful level.
    const DiscreteMeasure& final_measure() const;
};

/// Solves every level, extends each solution by zero to the top level and
/// evaluates all family members. Failed levels are recorded and skipped.
/// Throws construction_failed when fewer than min(2, #levels) levels succeed.
Construction run_construction(const LagrangianKernel& k, std::span<const SolverConfig> per_level,
                              const TestSetFamily& family, int tail_window);

/// Same bookkeeping from already-solved levels (no solver calls).
Construction assemble_construction(std::vector<LevelOutcome> levels, const TestSetFamily& family,
                                   int tail_window);

double bl_discrepancy_lower_bound(const DiscreteMeasure& a, const DiscreteMeasure& b);
DiscreteMeasure restrict_to(const DiscreteMeasure& m, const TestSet& d);

enum class PhiLaw { monotonicity, subadditivity, additivity };
std::string_view to_string(PhiLaw law) noexcept;

struct PhiViolation {
    PhiLaw law;
    std::size_t first;
    std::size_t second;
    std::optional<std::size_t> union_member;
    double lhs;
    double rhs;
};

struct PhiCheck {
    std::vector<PhiViolation> violations;
    std::size_t pairs = 0;
    std::size_t subset_pairs = 0;
    std::size_t disjoint_pairs = 0;
    std::size_t union_pairs = 0;
    std::size_t undecided_pairs = 0;  // no provable subset/disjoint relation and no union member
};

/// Monotonicity on provable subsets, subadditivity where the union is a
/// member, additivity on provably disjoint pairs with a union member (1e-9).
PhiCheck check_phi_properties(const PhiTable& phi, const TestSetFamily& family);

struct SetValue {
    double value = 0.0;
    std::optional<std::size_t> witness;  // member (mu) or candidate region (eta)
};

/// max phi_hat(D) over members provably inside u; 0 if there are none.
SetValue mu_hat(const PhiTable& phi, const TestSetFamily& family, const OpenRegion& u);

/// min mu_hat(U) over candidates provably containing a; +inf if none does.
SetValue eta_hat(const PhiTable& phi, const TestSetFamily& family, const TestSet& a,
                 std::span<const OpenRegion> candidates);

struct ConditionBReport {
    double eps = 0.0;
    int top_level = 1;
    std::optional<int> satisfied_at;
    std::vector<double> outside_mass;  // mass in b above level n, n = 1..top_level
};

/// Least n (below the top level when there is more than one level) with the
/// mass of atoms in b at intrinsic level > n under eps. The top level is left
/// out because every top-level measure satisfies it trivially there.
/// Ball levels of b are ignored: b is a bounded set of the full space.
ConditionBReport check_condition_B(const DiscreteMeasure& final_measure, const TestSet& b, double eps);
ConditionBReport check_condition_B(std::span<const LevelSolution> levels, const TestSet& b, double eps);

struct NontrivialityWitness {
    std::size_t member = 0;
    int from_level = 1;
    double min_value = 0.0;
};

struct NontrivialityVerdict {
    double c_floor = 0.0;
    std::vector<NontrivialityWitness> witnesses;
    bool nontrivial = false;
    bool possibly_infinite_volume = false;  // several pairwise disjoint witnesses
    std::vector<double> total_volumes;      // per successful level
    /// min over levels and atoms of bound * rho(closed R-ball around the atom);
    /// >= 1 is forced by the normalization when L <= bound and L vanishes beyond R.
    std::optional<double> range_ball_ratio;
};

/// Members holding at least c_floor at every level from some level on; the
/// run must cover at least min(2, #levels) levels.
NontrivialityVerdict check_nontriviality(std::span<const LevelSolution> levels, const TestSetFamily& family,
                                         double c_floor, const LagrangianKernel* kernel = nullptr);

}  // namespace cvp
