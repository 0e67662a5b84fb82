#include "cvp/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "cvp/error.hpp"
#include "cvp/numeric.hpp"
#include "cvp/parallel.hpp"
#include "cvp/rng.hpp"

namespace cvp {
namespace {

constexpr int kSequenceLength = 40;
constexpr double kClosureTol = 1e-8;

double spectral_norm(const Eigen::MatrixXcd& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
    return svd.singularValues()[0];
}

// Symmetric orthonormalization A (A^H A)^(-1/2); continuous in A.
Eigen::MatrixXcd lowdin(const Eigen::MatrixXcd& a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a.adjoint() * a);
    const Eigen::VectorXd inv_sqrt = es.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    return a * (es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().adjoint());
}

}  // namespace

double default_signature_tol(const Eigen::MatrixXcd& a) { return 1e-8 * spectral_norm(a); }

Signature eigen_signature(const Eigen::MatrixXcd& a, double tol) {
    if (a.rows() != a.cols()) throw Error(ErrorKind::shape_error, "signature needs a square matrix");
    if (tol < 0.0) throw Error(ErrorKind::invalid_argument, "tolerance must be nonnegative");
    Signature sig;
    if (a.size() == 0) return sig;
    const double asym = spectral_norm(a - a.adjoint());
    if (asym > tol)
        throw Error(ErrorKind::shape_error, "matrix is not self-adjoint within tolerance (residual " +
                                                std::to_string(asym) + ")");
    const Eigen::MatrixXcd h = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::numerical_failure, "signature eigensolver");
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double v = es.eigenvalues()[i];
        if (v > tol) ++sig.positive;
        if (v < -tol) ++sig.negative;
    }
    return sig;
}

Signature eigen_signature(const OperatorPoint& a, double tol) {
    if (tol < 0.0) throw Error(ErrorKind::invalid_argument, "tolerance must be nonnegative");
    Signature sig;
    for (Eigen::Index i = 0; i < a.eigenvalues().size(); ++i) {
        if (a.eigenvalues()[i] > tol) ++sig.positive;
        if (a.eigenvalues()[i] < -tol) ++sig.negative;
    }
    return sig;
}

ClosureReport closure_test(int s, int n, int trials, std::uint64_t seed) {
    if (trials < 1) throw Error(ErrorKind::invalid_argument, "closure_test needs trials >= 1");
    if (s < 1 || n < 1) throw Error(ErrorKind::invalid_argument, "s and N must be positive");
    ClosureReport rep;
    rep.spin_dimension = s;
    rep.hilbert_trunc = n;
    rep.trials = trials;

    Rng rng = stream(seed, "closure");
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> count(0, s);

    for (int t = 0; t < trials; ++t) {
        int pos = count(rng), neg = count(rng);
        if (pos + neg == 0) pos = 1;
        const int r = std::min(pos + neg, n);
        pos = std::min(pos, r);
        neg = r - pos;
        Eigen::VectorXd base(r);
        for (int i = 0; i < r; ++i) base[i] = (i < pos ? 1.0 : -1.0) * (0.5 + 1.5 * unit(rng));

        auto gaussian = [&] {
            Eigen::MatrixXcd m(n, r);
            for (int j = 0; j < r; ++j)
                for (int i = 0; i < n; ++i) m(i, j) = {normal(rng), normal(rng)};
            return m;
        };
        const int mode = t % 3;  // 0 constant, 1 eigenvalue collapse, 2 frame + eigenvalue drift
        Eigen::MatrixXcd frame_seed = gaussian();
        std::vector<Eigen::MatrixXcd> kicks;
        if (mode == 2)
            for (int j = 0; j < kSequenceLength; ++j) kicks.push_back(gaussian());
        std::vector<char> collapse(static_cast<std::size_t>(r), 0);
        Eigen::VectorXd drift = Eigen::VectorXd::Zero(r);
        for (int i = 0; i < r; ++i) {
            collapse[static_cast<std::size_t>(i)] = mode == 1 && unit(rng) < 0.5;
            if (mode == 2) drift[i] = 2.0 * unit(rng) - 1.0;
        }
        if (mode == 1 && std::none_of(collapse.begin(), collapse.end(), [](char c) { return c != 0; }))
            collapse[0] = 1;

        auto element = [&](int k) {
            Eigen::MatrixXcd a = frame_seed;
            for (int j = 0; j < k && j < static_cast<int>(kicks.size()); ++j) a += std::ldexp(1.0, -(j + 1)) * kicks[static_cast<std::size_t>(j)];
            Eigen::VectorXd ev = base;
            for (int i = 0; i < r; ++i) {
                if (collapse[static_cast<std::size_t>(i)]) ev[i] = std::ldexp(base[i], -k);
                ev[i] *= 1.0 + 0.5 * std::ldexp(drift[i], -k);
            }
            return OperatorPoint(ev, lowdin(a), s);  // validates the signature of every element
        };

        const Eigen::MatrixXcd limit = element(kSequenceLength).materialize();
        const Eigen::MatrixXcd before = element(kSequenceLength - 1).materialize();
        rep.max_tail_step = std::max(rep.max_tail_step, spectral_norm(limit - before));
        const Signature sig = eigen_signature(limit, kClosureTol);
        if (sig.positive > s || sig.negative > s) ++rep.violations;
    }
    return rep;
}

DimensionReport estimate_dimension(std::span<const Point> points, std::span<const double> radii) {
    if (points.size() < 10) throw Error(ErrorKind::invalid_argument, "dimension estimate needs >= 10 points");
    if (radii.size() < 3) throw Error(ErrorKind::invalid_argument, "dimension estimate needs >= 3 radii");
    std::vector<double> r(radii.begin(), radii.end());
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    if (r.size() < 3 || !(r.front() > 0.0) || r.back() < 10.0 * r.front())
        throw Error(ErrorKind::invalid_argument, "radii must be positive, distinct and span a decade");

    DimensionReport rep;
    rep.radii_used = r;
    const std::size_t n = points.size();
    const std::size_t nr = r.size();

    const bool coincident = std::all_of(points.begin(), points.end(),
                                        [&](const Point& p) { return distance(p, points[0]) == 0.0; });
    if (coincident) {
        rep.degenerate = true;
        rep.fit_quality = 1.0;
        rep.local_estimates.assign(n, 0.0);
        rep.correlation_sums.assign(nr, 1.0);
        rep.pair_counts.assign(nr, static_cast<std::uint64_t>(n) * (n - 1) / 2);
        return rep;
    }

    // Flat coordinates for the Euclidean case.
    const bool flat = std::all_of(points.begin(), points.end(),
                                  [](const Point& p) { return p.realization() == Realization::euclidean; });
    std::size_t dim = 0;
    std::vector<double> xs;
    if (flat) {
        for (const auto& p : points) dim = std::max(dim, p.coords().size());
        xs.assign(n * dim, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            std::copy(points[i].coords().begin(), points[i].coords().end(), xs.begin() + static_cast<std::ptrdiff_t>(i * dim));
    }
    const double rmax2 = r.back() * r.back();

    // counts[i * nr + k]: neighbours j != i with distance in (r[k-1], r[k]].
    std::vector<std::uint64_t> counts(n * nr, 0);
    parallel_for(n, [&](std::size_t i) {
        std::uint64_t* row = counts.data() + i * nr;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            double d;
            if (flat) {
                const double* a = xs.data() + i * dim;
                const double* b = xs.data() + j * dim;
                double s = 0.0;
                for (std::size_t c = 0; c < dim; ++c) {
                    const double t = a[c] - b[c];
                    s += t * t;
                }
                if (s > rmax2) continue;
                d = std::sqrt(s);
            } else {
                d = distance(points[i], points[j]);
            }
            const auto k = static_cast<std::size_t>(std::lower_bound(r.begin(), r.end(), d) - r.begin());
            if (k < nr) ++row[k];
        }
        for (std::size_t k = 1; k < nr; ++k) row[k] += row[k - 1];
    });

    const double total_pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < nr; ++k) {
        std::uint64_t twice = 0;
        for (std::size_t i = 0; i < n; ++i) twice += counts[i * nr + k];
        rep.pair_counts.push_back(twice / 2);
        const double c = static_cast<double>(twice / 2) / total_pairs;
        rep.correlation_sums.push_back(c);
        if (c > 0.0) {
            lx.push_back(std::log(r[k]));
            ly.push_back(std::log(c));
        }
    }
    if (lx.size() >= 2) {
        const LinearFit fit = fit_line(lx, ly);
        rep.global_estimate = std::max(0.0, fit.slope);
        rep.fit_quality = std::clamp(fit.r_squared, 0.0, 1.0);
    }

    std::vector<double> logr(nr);
    for (std::size_t k = 0; k < nr; ++k) logr[k] = std::log(r[k]);
    rep.local_estimates.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> lc(nr);
        for (std::size_t k = 0; k < nr; ++k) lc[k] = std::log(1.0 + static_cast<double>(counts[i * nr + k]));
        rep.local_estimates[i] = std::max(0.0, fit_line(logr, lc).slope);
    }
    return rep;
}

}  // namespace cvp
