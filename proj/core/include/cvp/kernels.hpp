#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "cvp/space.hpp"

namespace cvp {

enum class KernelKind { bounded_range, entropy_vanishing, causal_fermion, user_table };

std::string_view to_string(KernelKind kind) noexcept;

/// Piecewise-linear function of distance. Constant (first value) before the
/// first knot, linear between knots, 0 beyond the last knot.
class DistanceTable {
public:
    DistanceTable() = default;
    explicit DistanceTable(std::vector<std::pair<double, double>> knots);

    double operator()(double d) const noexcept;
    bool nonincreasing() const noexcept;
    double last_knot() const noexcept { return knots_.empty() ? 0.0 : knots_.back().first; }
    const std::vector<std::pair<double, double>>& knots() const noexcept { return knots_; }

private:
    std::vector<std::pair<double, double>> knots_;
};

/// c * max(0, 1 - d/R)^p
struct BoundedRangeParams {
    double plateau = 1.0;
    double cutoff = 1.0;
    double exponent = 1.0;
};

/// Plateau c within distance delta, then an envelope damped by 2^-m and the
/// covering-number normalizer of the exhaustion shell containing y.
struct EntropyVanishingParams {
    double plateau = 1.0;
    double plateau_radius = 1.0;
    DistanceTable envelope;
    std::vector<TestSet> exhaustion;  // K_1 ⊂ K_2 ⊂ ...
    int sample_budget = 64;

    double normalizer() const noexcept { return 1.0 + 2.0 / plateau; }
};

/// |(xy)^2| - (1/2s) |xy|^2 on operator points.
struct CausalFermionParams {
    int spin_dimension = 1;
    int hilbert_trunc = 4;
};

/// L(x, y) = table(distance(x, y)).
struct UserTableParams {
    DistanceTable table;
};

using KernelParams =
    std::variant<BoundedRangeParams, EntropyVanishingParams, CausalFermionParams, UserTableParams>;

/// Symmetric nonnegative pair function with class metadata: the declared
/// diagonal lower bound c, optional range radius R and optional sup bound.
/// Immutable; evaluation is thread-safe.
class LagrangianKernel {
public:
    static LagrangianKernel bounded_range(BoundedRangeParams p);
    static LagrangianKernel entropy_vanishing(EntropyVanishingParams p);
    static LagrangianKernel causal_fermion(CausalFermionParams p);
    static LagrangianKernel user_table(UserTableParams p, double diagonal_bound,
                                       std::optional<double> range_radius = std::nullopt);

    KernelKind kind() const noexcept;
    const KernelParams& params() const noexcept { return *params_; }
    double diagonal_bound() const noexcept { return c_; }
    std::optional<double> range_radius() const noexcept { return range_; }
    std::optional<double> bound() const noexcept { return bound_; }

    /// Copy with a different claimed diagonal bound (used to probe condition (a)).
    LagrangianKernel with_diagonal_bound(double c) const;

    /// Evaluates with arguments in canonical order, so (x, y) and (y, x) give
    /// bitwise-identical results.
    double operator()(const Point& x, const Point& y) const;

    // Exhaustion bookkeeping for the entropy kind (1-based indices).
    /// Least N with x in K_m for every listed m >= N.
    std::optional<int> anchor_index(const Point& x) const;
    /// Least m >= 1 with y in K_m(x) = K_{m + N(x) - 1}.
    std::optional<int> shell_index(const Point& x, const Point& y) const;
    /// C * E(K_{m+2}(x), delta); indices past the listed exhaustion clamp to its last set.
    double entropy_normalizer(const Point& x, int m) const;
    /// Covering-number estimates of each K_j, j = 1..size.
    const std::vector<int>& exhaustion_entropy() const noexcept { return entropies_; }

private:
    LagrangianKernel() = default;
    double eval_ordered(const Point& x, const Point& y) const;

    std::shared_ptr<const KernelParams> params_;
    double c_ = 0.0;
    std::optional<double> range_;
    std::optional<double> bound_;
    std::vector<int> entropies_;
};

inline double eval(const LagrangianKernel& k, const Point& x, const Point& y) { return k(x, y); }

/// Gram matrix L(x_i, x_j).
Eigen::MatrixXd gram_matrix(const LagrangianKernel& k, std::span<const Point> points);

/// Eigenvalues of the reduced product D_x (U_x^H U_y) D_y (U_y^H U_x), padded
/// with zeros to 2s entries. Same nonzero spectrum as the operator product xy.
Eigen::VectorXcd product_spectrum(const OperatorPoint& x, const OperatorPoint& y);

/// Sum of |eigenvalue| with algebraic multiplicity.
double spectral_weight(const Eigen::MatrixXcd& a);
double spectral_weight(const OperatorPoint& a);

/// K_m = closed ball of radius m about the origin of level m, m = 1..levels.
std::vector<TestSet> origin_exhaustion(int levels, int dims_per_level);

/// Deterministic low-discrepancy sample of a Euclidean test set:
/// `budget` points per ball, the ball center first.
std::vector<Point> sample_test_set(const TestSet& k, int budget, std::uint64_t seed = 0);

/// Greedy delta-cover of a finite sample: repeatedly promote the lowest-index
/// uncovered point to a center. Returns the center indices.
std::vector<std::size_t> greedy_cover(std::span<const Point> sample, double delta);

/// Upper-bound style covering number of K at scale delta (greedy cover of
/// sample_test_set). Deterministic in (K, delta, budget, seed).
int entropy_estimate(const TestSet& k, double delta, int sample_budget, std::uint64_t seed = 0);

struct PairViolation {
    std::size_t i = 0;
    std::size_t j = 0;
    double value = 0.0;
    double bound = 0.0;
};

/// Sampling-based check of the kernel class conditions. Empty violation
/// lists mean "no violation among the sampled pairs", not a proof.
struct ClassReport {
    std::size_t sample_size = 0;
    std::size_t pairs_checked = 0;
    double declared_c = 0.0;
    double diagonal_min = std::numeric_limits<double>::infinity();
    std::size_t diagonal_witness = 0;
    bool condition_a = true;
    double plateau_radius_estimate = std::numeric_limits<double>::infinity();
    std::size_t plateau_witness = 0;
    std::vector<PairViolation> range_violations;
    std::vector<PairViolation> decay_violations;
    std::size_t decay_pairs_checked = 0;

    bool passed() const noexcept {
        return condition_a && range_violations.empty() && decay_violations.empty();
    }
};

ClassReport check_kernel_class(const LagrangianKernel& k, std::span<const Point> sample,
                               const TestSet* excluded = nullptr);

}  // namespace cvp
