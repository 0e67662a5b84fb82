#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cvp/space.hpp"

namespace cvp {

struct Atom {
    Point point;
    double weight;
};

/// Points closer than this are the same atom.
inline constexpr double atom_merge_distance = 1e-9;

/// Finite atomic measure. Weights are strictly positive, no two atoms share a
/// point, and every atom lives in the level-`level()` slice.
class DiscreteMeasure {
public:
    /// Empty measure at the given level.
    explicit DiscreteMeasure(int level = 1);
    /// Drops zero weights and merges atoms within atom_merge_distance (first
    /// occurrence keeps its position). Negative or non-finite weights throw.
    DiscreteMeasure(std::vector<Atom> atoms, int level);

    const std::vector<Atom>& atoms() const noexcept { return atoms_; }
    int level() const noexcept { return level_; }
    std::size_t size() const noexcept { return atoms_.size(); }
    bool empty() const noexcept { return atoms_.empty(); }

    double total_volume() const;
    std::vector<double> weights() const;

    /// Weights multiplied by t > 0.
    DiscreteMeasure scaled(double t) const;

private:
    std::vector<Atom> atoms_;
    int level_;
};

/// Atom-list concatenation followed by merging.
DiscreteMeasure merge(const DiscreteMeasure& a, const DiscreteMeasure& b);

double measure_of(const DiscreteMeasure& m, const TestSet& s);
double measure_of(const DiscreteMeasure& m, const OpenRegion& u);
double measure_of(const DiscreteMeasure& m, const Ball& b);

/// rho^[n](A) := rho_n(A ∩ F^(n)): atoms lifted to the target level, nothing added.
DiscreteMeasure extend_by_zero(const DiscreteMeasure& mn, int target_level);

/// rho_tilde - rho split into positive and negative parts after cancelling
/// shared atoms. `region` holds one tiny ball per surviving atom; outside it the
/// two measures agree.
struct SignedDifference {
    DiscreteMeasure plus;
    DiscreteMeasure minus;
    TestSet region;

    double total_variation() const { return plus.total_volume() + minus.total_volume(); }
    double net_change() const { return plus.total_volume() - minus.total_volume(); }
    bool empty() const noexcept { return plus.empty() && minus.empty(); }
};

SignedDifference difference(const DiscreteMeasure& rho_tilde, const DiscreteMeasure& rho);

/// |net volume change| <= tol (total variation is always finite here).
bool is_variation_of_finite_volume(const DiscreteMeasure& rho_tilde, const DiscreteMeasure& rho,
                                   double tol);

std::vector<Point> support(const DiscreteMeasure& m);

}  // namespace cvp
