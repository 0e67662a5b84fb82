#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace cvp {

/// Self-adjoint operator of rank <= 2s on a truncated Hilbert space, stored in
/// factored form x = frame * diag(eigenvalues) * frame^H with orthonormal frame
/// columns. At most s eigenvalues are positive and at most s negative.
class OperatorPoint {
public:
    /// Zero operator.
    static OperatorPoint zero(int spin_dimension, int hilbert_trunc);

    /// Validates orthonormality (1e-10), signature and shapes; zero eigenvalues
    /// are dropped together with their frame columns.
    OperatorPoint(Eigen::VectorXd eigenvalues, Eigen::MatrixXcd frame, int spin_dimension);

    const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
    const Eigen::MatrixXcd& frame() const noexcept { return frame_; }
    int spin_dimension() const noexcept { return spin_; }
    int hilbert_trunc() const noexcept { return static_cast<int>(frame_.rows()); }
    int rank() const noexcept { return static_cast<int>(eigenvalues_.size()); }

    /// Dense N x N matrix.
    Eigen::MatrixXcd materialize() const;

    /// Index of the last Hilbert-basis row with a nonzero frame entry, or -1.
    int last_nonzero_row() const noexcept;

    /// Haar-random frame with the given eigenvalues; rows at or beyond
    /// `active_rows` are zero.
    template <class Gen>
    static OperatorPoint random(Gen& gen, int spin_dimension, int hilbert_trunc,
                                const Eigen::VectorXd& eigenvalues, int active_rows);

private:
    OperatorPoint() = default;

    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXcd frame_;
    int spin_ = 1;
};

enum class Realization { euclidean, operator_ };

/// Element of the ambient space tagged with an exhaustion level. The level-n
/// slice is spanned by the first n * dims_per_level coordinates (or Hilbert
/// basis vectors for operators).
class Point {
public:
    /// Euclidean point; coords.size() must equal level * dims_per_level.
    Point(int level, std::vector<double> coords, int dims_per_level);
    /// Euclidean point with dims_per_level = coords.size() / level.
    static Point euclidean(int level, std::vector<double> coords);
    /// Operator point. Frame rows at or beyond level * dims_per_level must be zero.
    Point(int level, OperatorPoint op, int dims_per_level);

    int level() const noexcept { return level_; }
    int dims_per_level() const noexcept { return dims_per_level_; }
    Realization realization() const noexcept { return realization_; }
    const std::vector<double>& coords() const;
    const OperatorPoint& op() const;

    /// Smallest n with the point in the level-n slice. Can be below level().
    int intrinsic_level() const noexcept;

private:
    int level_;
    int dims_per_level_;
    Realization realization_;
    std::vector<double> coords_;
    std::optional<OperatorPoint> op_;
};

/// Euclidean norm of the coordinate difference (shorter vector zero-padded), or
/// operator norm of x - y evaluated on the joint column span of both frames.
double distance(const Point& x, const Point& y);

/// Inclusion of the level-n slice into the level-m slice, m >= n.
Point lift(const Point& x, int target_level);

/// Strict weak order used to canonicalize argument order in symmetric
/// evaluations. Compares level, then coordinates / eigenvalues / frame entries.
bool canonical_less(const Point& a, const Point& b);

/// Representations coincide entry for entry after zero padding.
bool same_representation(const Point& a, const Point& b);

/// Closed ball intersected with the level-`level` slice.
struct Ball {
    Point center;
    double radius;
    int level;
};

bool contains(const Ball& ball, const Point& p);

/// Compact test set: finite union of closed level-restricted balls.
struct TestSet {
    std::vector<Ball> balls;
    int id = 0;
};

bool contains(const TestSet& set, const Point& p);

/// Open metric ball in the full space (no level restriction).
struct OpenBall {
    Point center;
    double radius;
};

struct OpenRegion {
    std::vector<OpenBall> balls;
};

bool contains(const OpenRegion& region, const Point& p);

/// Finite prefix of the countable test-set family. Every member is a union
/// of base balls (sample point, radius); `member_keys[i]` lists the sorted
/// base-ball indices of member i.
struct TestSetFamily {
    std::vector<TestSet> members;
    std::vector<Point> dense_sample;
    std::vector<double> radii;
    int union_depth = 0;
    std::vector<Ball> base_balls;
    std::vector<std::vector<int>> member_keys;
    std::vector<int> member_depth;
    std::map<std::vector<int>, std::size_t> key_index;

    /// Member whose ball set equals the union of members a and b, if present.
    std::optional<std::size_t> find_union(std::size_t a, std::size_t b) const;
    /// Members whose balls all live in the level-n slice.
    std::vector<std::size_t> members_within_level(int n) const;
};

inline constexpr std::size_t default_family_cap = 200000;

/// One single-ball member per (sample point, radius), then `union_depth`
/// rounds of pairwise-union closure, deduplicated by ball-set equality.
/// Ball levels are the intrinsic levels of their centers.
TestSetFamily build_test_family(std::span<const Point> dense_sample, std::span<const double> radii,
                                int union_depth, std::size_t max_members = default_family_cap);

/// Sound but incomplete test for d being a subset of u: every ball (c, r) of d
/// has an open ball (c', r') of u with distance(c, c') + r < r'.
bool subset_of(const TestSet& d, const OpenRegion& u);

/// Sound ball-level containment for closed balls: a inside b.
bool ball_inside(const Ball& a, const Ball& b);
/// Sound disjointness: every ball pair separated by more than the radius sum.
bool provably_disjoint(const TestSet& a, const TestSet& b);
/// Sound containment: every ball of a inside some ball of b.
bool provably_subset(const TestSet& a, const TestSet& b);
/// Every ball of u covered by a ball of u2 (ball-wise coverage).
bool region_covered(const OpenRegion& u, const OpenRegion& u2);

// ---------------------------------------------------------------------------

template <class Gen>
OperatorPoint OperatorPoint::random(Gen& gen, int spin_dimension, int hilbert_trunc,
                                    const Eigen::VectorXd& eigenvalues, int active_rows) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const int r = static_cast<int>(eigenvalues.size());
    const int rows = std::min(active_rows, hilbert_trunc);
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(rows, r);
    for (int j = 0; j < r; ++j)
        for (int i = 0; i < rows; ++i) g(i, j) = {normal(gen), normal(gen)};
    Eigen::MatrixXcd frame = Eigen::MatrixXcd::Zero(hilbert_trunc, r);
    if (r > 0) {
        Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
        frame.topRows(rows) =
            qr.householderQ() * Eigen::MatrixXcd::Identity(rows, r);
    }
    return OperatorPoint(eigenvalues, std::move(frame), spin_dimension);
}

}  // namespace cvp
