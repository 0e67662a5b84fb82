#include "cvp/numeric.hpp"

#include <cmath>

#include "cvp/error.hpp"

namespace cvp {
namespace {

constexpr std::size_t kLeaf = 8;

double tree_sum(const double* v, std::size_t n) noexcept {
    if (n <= kLeaf) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t half = n / 2;
    return tree_sum(v, half) + tree_sum(v + half, n - half);
}

double tree_dot(const double* a, const double* b, std::size_t n) noexcept {
    if (n <= kLeaf) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
        return s;
    }
    const std::size_t half = n / 2;
    return tree_dot(a, b, half) + tree_dot(a + half, b + half, n - half);
}

}  // namespace

double pairwise_sum(std::span<const double> values) noexcept {
    return tree_sum(values.data(), values.size());
}

double pairwise_dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw Error(ErrorKind::dimension_mismatch, "pairwise_dot length");
    return tree_dot(a.data(), b.data(), a.size());
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw Error(ErrorKind::invalid_argument, "fit_line needs two or more (x, y) pairs");
    const double n = static_cast<double>(x.size());
    const double mx = pairwise_sum(x) / n;
    const double my = pairwise_sum(y) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    LinearFit fit;
    if (sxx == 0.0) {
        fit.intercept = my;
        fit.r_squared = 0.0;
        return fit;
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy == 0.0 ? 1.0 : std::min(1.0, (sxy * sxy) / (sxx * syy));
    return fit;
}

}  // namespace cvp
