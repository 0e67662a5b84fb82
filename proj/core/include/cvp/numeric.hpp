#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cvp {

/// Pairwise (tree) summation. The split points depend only on the length,
/// so equal inputs give bitwise-equal sums.
double pairwise_sum(std::span<const double> values) noexcept;

/// Sum of a[i] * b[i] with the same tree as pairwise_sum.
double pairwise_dot(std::span<const double> a, std::span<const double> b);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Ordinary least squares y = slope * x + intercept.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace cvp
