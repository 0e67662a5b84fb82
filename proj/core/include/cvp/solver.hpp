#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cvp/action.hpp"
#include "cvp/error.hpp"
#include "cvp/kernels.hpp"
#include "cvp/measure.hpp"

namespace cvp {

struct SolverConfig {
    int level = 1;
    std::vector<Point> candidate_grid;
    double initial_volume = 1.0;
    int max_outer_iters = 200;
    double qp_tolerance = 1e-10;
    double insertion_tolerance = 1e-9;
    double weight_floor = 1e-12;
    std::uint64_t seed = 0;
    bool normalize_to_one = true;

    void validate() const;
};

/// Minimizer of w^T G w over {w >= 0, sum w = V}. `lambda` is the multiplier
/// of the volume constraint: (G w)_i = lambda / 2 on the support.
struct WeightSolution {
    Eigen::VectorXd weights;
    double lambda = 0.0;
    double objective = 0.0;
    double kkt_residual = 0.0;
    int iterations = 0;
    double condition_estimate = 1.0;
    bool ill_conditioned = false;  // condition estimate above 1e12
    bool used_fallback = false;    // projected-gradient polish was needed
};

/// Thrown when the weight QP misses its KKT tolerance within the iteration cap.
class SolverStall : public Error {
public:
    SolverStall(const std::string& what, WeightSolution best)
        : Error(ErrorKind::solver_stall, what), best_(std::move(best)) {}
    const WeightSolution& best() const noexcept { return best_; }

private:
    WeightSolution best_;
};

/// KKT residual of w for the simplex QP: on {w > 0} |(Gw)_i - lambda/2|, on
/// {w = 0} max(0, lambda/2 - (Gw)_i).
double kkt_residual(const Eigen::MatrixXd& gram, const Eigen::VectorXd& w, double lambda);

/// Active-set solve with a projected-gradient fallback for indefinite Gram
/// matrices. Deterministic.
WeightSolution solve_weights(const Eigen::MatrixXd& gram, double volume, double tol,
                             const Eigen::VectorXd* warm_start = nullptr);
WeightSolution solve_weights(const LagrangianKernel& k, std::span<const Point> support, double volume,
                             double tol);

struct LevelSolution {
    int level = 1;
    DiscreteMeasure measure;
    double s_param = 0.0;
    double lambda = 0.0;
    ELReport el_report;
    double action_value = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> action_history;  // pre-normalization, one entry per outer iteration
    std::vector<Point> candidate_grid;   // deduplicated
    double qp_tolerance = 0.0;
    double insertion_tolerance = 0.0;
    std::vector<std::string> warnings;
};

/// Level solve failed; carries whatever partial solution exists.
class LevelFailure : public Error {
public:
    LevelFailure(ErrorKind kind, const std::string& what, std::optional<LevelSolution> partial)
        : Error(kind, what), partial_(std::move(partial)) {}
    const std::optional<LevelSolution>& partial() const noexcept { return partial_; }

private:
    std::optional<LevelSolution> partial_;
};

/// Support-insertion loop: weight QP on the current support, drop atoms below
/// the floor, insert the worst EL violator of the candidate grid, repeat.
/// With normalize_to_one the weights are rescaled so the potential equals 1 on
/// the support.
LevelSolution solve_level(const LagrangianKernel& k, const SolverConfig& cfg);

struct MinimalityReport {
    double min_delta = 0.0;
    int trials = 0;
    int negative_count = 0;  // deltas below -1e-8
    std::string worst_move;
};

/// Random volume-preserving variations (rebalancing between atoms, transport to
/// candidate-grid points near an atom, and both combined); reports the smallest
/// action difference.
MinimalityReport verify_minimality(const LagrangianKernel& k, const LevelSolution& sol, int trials,
                                   std::uint64_t seed);

/// Control instance for verify_minimality: the heaviest atom is halved and the
/// removed mass goes to the atom it interacts with least.
LevelSolution corrupt_solution(const LagrangianKernel& k, const LevelSolution& sol);

}  // namespace cvp
