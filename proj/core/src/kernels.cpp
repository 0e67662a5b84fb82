#include "cvp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cvp/error.hpp"
#include "cvp/parallel.hpp"

namespace cvp {
namespace {

constexpr double kClampBand = 1e-10;

double radical_inverse(std::uint64_t index, int base) noexcept {
    double inv = 1.0 / base, f = inv, r = 0.0;
    while (index > 0) {
        r += f * static_cast<double>(index % static_cast<std::uint64_t>(base));
        index /= static_cast<std::uint64_t>(base);
        f *= inv;
    }
    return r;
}

std::vector<int> first_primes(std::size_t n) {
    std::vector<int> primes;
    for (int c = 2; primes.size() < n; ++c) {
        bool prime = true;
        for (int p : primes) {
            if (p * p > c) break;
            if (c % p == 0) {
                prime = false;
                break;
            }
        }
        if (prime) primes.push_back(c);
    }
    return primes;
}

void require_operator(const Point& p, const CausalFermionParams& cf) {
    if (p.realization() != Realization::operator_)
        throw Error(ErrorKind::kind_mismatch, "causal fermion kernel needs operator points");
    if (p.op().spin_dimension() != cf.spin_dimension || p.op().hilbert_trunc() != cf.hilbert_trunc)
        throw Error(ErrorKind::kind_mismatch, "operator point does not match kernel s / N");
}

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw Error(ErrorKind::invalid_argument, std::string(what) + " must be positive");
}

}  // namespace

std::string_view to_string(KernelKind kind) noexcept {
    switch (kind) {
        case KernelKind::bounded_range: return "bounded_range";
        case KernelKind::entropy_vanishing: return "entropy_vanishing";
        case KernelKind::causal_fermion: return "causal_fermion";
        case KernelKind::user_table: return "user_table";
    }
    return "unknown";
}

// --- DistanceTable ------------------------------------------------------------

DistanceTable::DistanceTable(std::vector<std::pair<double, double>> knots) : knots_(std::move(knots)) {
    if (knots_.empty()) throw Error(ErrorKind::invalid_argument, "distance table needs a knot");
    for (std::size_t i = 0; i < knots_.size(); ++i) {
        if (!std::isfinite(knots_[i].first) || !std::isfinite(knots_[i].second) || knots_[i].second < 0.0)
            throw Error(ErrorKind::invalid_argument, "distance table values must be finite and nonnegative");
        if (i > 0 && !(knots_[i].first > knots_[i - 1].first))
            throw Error(ErrorKind::invalid_argument, "distance table knots must increase");
    }
}

double DistanceTable::operator()(double d) const noexcept {
    if (knots_.empty() || d > knots_.back().first) return 0.0;
    if (d <= knots_.front().first) return knots_.front().second;
    auto hi = std::lower_bound(knots_.begin(), knots_.end(), d,
                               [](const auto& k, double v) { return k.first < v; });
    auto lo = hi - 1;
    const double t = (d - lo->first) / (hi->first - lo->first);
    return lo->second + t * (hi->second - lo->second);
}

bool DistanceTable::nonincreasing() const noexcept {
    for (std::size_t i = 1; i < knots_.size(); ++i)
        if (knots_[i].second > knots_[i - 1].second) return false;
    return true;
}

// --- kernel construction ------------------------------------------------------

LagrangianKernel LagrangianKernel::bounded_range(BoundedRangeParams p) {
    require_positive(p.plateau, "plateau");
    require_positive(p.cutoff, "cutoff");
    if (!(p.exponent >= 1.0)) throw Error(ErrorKind::invalid_argument, "shape exponent must be >= 1");
    LagrangianKernel k;
    k.c_ = p.plateau;
    k.range_ = p.cutoff;
    k.bound_ = p.plateau;
    k.params_ = std::make_shared<const KernelParams>(p);
    return k;
}

LagrangianKernel LagrangianKernel::entropy_vanishing(EntropyVanishingParams p) {
    require_positive(p.plateau, "plateau");
    require_positive(p.plateau_radius, "plateau radius");
    if (p.sample_budget < 1) throw Error(ErrorKind::invalid_budget, "sample budget must be >= 1");
    if (!p.envelope.nonincreasing())
        throw Error(ErrorKind::invalid_argument, "entropy envelope must be nonincreasing");
    if (p.exhaustion.empty()) throw Error(ErrorKind::invalid_argument, "entropy kernel needs an exhaustion");
    LagrangianKernel k;
    k.c_ = p.plateau;
    k.bound_ = p.plateau;
    for (const auto& set : p.exhaustion)
        k.entropies_.push_back(entropy_estimate(set, p.plateau_radius, p.sample_budget));
    k.params_ = std::make_shared<const KernelParams>(std::move(p));
    return k;
}

LagrangianKernel LagrangianKernel::causal_fermion(CausalFermionParams p) {
    if (p.spin_dimension < 1 || p.hilbert_trunc < 1)
        throw Error(ErrorKind::invalid_argument, "s and N must be positive");
    LagrangianKernel k;
    k.c_ = 0.0;  // L(x, x) vanishes at x = 0; the diagonal bound is whatever the caller claims
    k.params_ = std::make_shared<const KernelParams>(p);
    return k;
}

LagrangianKernel LagrangianKernel::user_table(UserTableParams p, double diagonal_bound,
                                              std::optional<double> range_radius) {
    if (range_radius) require_positive(*range_radius, "range radius");
    LagrangianKernel k;
    k.c_ = diagonal_bound;
    k.range_ = range_radius;
    double sup = 0.0;
    for (const auto& [d, v] : p.table.knots()) sup = std::max(sup, v);
    k.bound_ = sup;
    k.params_ = std::make_shared<const KernelParams>(std::move(p));
    return k;
}

KernelKind LagrangianKernel::kind() const noexcept { return static_cast<KernelKind>(params_->index()); }

LagrangianKernel LagrangianKernel::with_diagonal_bound(double c) const {
    LagrangianKernel k = *this;
    k.c_ = c;
    return k;
}

// --- evaluation -----------------------------------------------------------------

double LagrangianKernel::operator()(const Point& x, const Point& y) const {
    return canonical_less(y, x) ? eval_ordered(y, x) : eval_ordered(x, y);
}

double LagrangianKernel::eval_ordered(const Point& x, const Point& y) const {
    return std::visit(
        [&](const auto& p) -> double {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, BoundedRangeParams>) {
                const double d = distance(x, y);
                if (d >= p.cutoff) return 0.0;
                return p.plateau * std::pow(1.0 - d / p.cutoff, p.exponent);
            } else if constexpr (std::is_same_v<P, EntropyVanishingParams>) {
                if (x.realization() != Realization::euclidean || y.realization() != Realization::euclidean)
                    throw Error(ErrorKind::kind_mismatch, "entropy kernel needs Euclidean points");
                const double d = distance(x, y);
                if (d <= p.plateau_radius) return p.plateau;
                if (d > p.envelope.last_knot()) return 0.0;
                const auto m = shell_index(x, y);
                if (!m) return 0.0;
                const double damped = std::ldexp(p.envelope(d), -*m) / entropy_normalizer(x, *m);
                return std::min(p.plateau, damped);
            } else if constexpr (std::is_same_v<P, CausalFermionParams>) {
                require_operator(x, p);
                require_operator(y, p);
                const Eigen::VectorXcd lambda = product_spectrum(x.op(), y.op());
                double sum_abs = 0.0, sum_sq = 0.0;
                for (Eigen::Index i = 0; i < lambda.size(); ++i) {
                    const double a = std::abs(lambda[i]);
                    sum_abs += a;
                    sum_sq += a * a;
                }
                const double v = sum_sq - sum_abs * sum_abs / (2.0 * p.spin_dimension);
                if (!std::isfinite(v)) throw Error(ErrorKind::numerical_failure, "non-finite Lagrangian");
                return (v < 0.0 && v >= -kClampBand) ? 0.0 : v;
            } else {
                return p.table(distance(x, y));
            }
        },
        *params_);
}

std::optional<int> LagrangianKernel::anchor_index(const Point& x) const {
    const auto* p = std::get_if<EntropyVanishingParams>(params_.get());
    if (!p) return std::nullopt;
    const int n = static_cast<int>(p->exhaustion.size());
    int anchor = n + 1;
    for (int j = n; j >= 1; --j) {
        if (!contains(p->exhaustion[static_cast<std::size_t>(j - 1)], x)) break;
        anchor = j;
    }
    if (anchor > n) return std::nullopt;
    return anchor;
}

std::optional<int> LagrangianKernel::shell_index(const Point& x, const Point& y) const {
    const auto* p = std::get_if<EntropyVanishingParams>(params_.get());
    if (!p) return std::nullopt;
    const auto anchor = anchor_index(x);
    if (!anchor) return std::nullopt;
    const int n = static_cast<int>(p->exhaustion.size());
    for (int m = 1; m + *anchor - 1 <= n; ++m)
        if (contains(p->exhaustion[static_cast<std::size_t>(m + *anchor - 2)], y)) return m;
    return std::nullopt;
}

double LagrangianKernel::entropy_normalizer(const Point& x, int m) const {
    const auto* p = std::get_if<EntropyVanishingParams>(params_.get());
    if (!p) throw Error(ErrorKind::kind_mismatch, "entropy normalizer on a non-entropy kernel");
    const auto anchor = anchor_index(x);
    if (!anchor) throw Error(ErrorKind::invalid_argument, "point lies outside the exhaustion");
    const int n = static_cast<int>(entropies_.size());
    const int j = std::min(m + 2 + *anchor - 1, n);
    return p->normalizer() * entropies_[static_cast<std::size_t>(j - 1)];
}

Eigen::MatrixXd gram_matrix(const LagrangianKernel& k, std::span<const Point> points) {
    const auto n = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd g(n, n);
    parallel_for(points.size(), [&](std::size_t i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = k(points[i], points[j]);
            g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            g(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
        }
    });
    return g;
}

// --- spectra --------------------------------------------------------------------

Eigen::VectorXcd product_spectrum(const OperatorPoint& x, const OperatorPoint& y) {
    const int width = 2 * x.spin_dimension();
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(width);
    if (x.rank() == 0 || y.rank() == 0) return out;
    const Eigen::MatrixXcd overlap = x.frame().adjoint() * y.frame();  // r_x x r_y
    const Eigen::MatrixXcd reduced = x.eigenvalues().asDiagonal() * overlap *
                                     y.eigenvalues().asDiagonal() * overlap.adjoint();
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(reduced, false);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::numerical_failure, "product spectrum");
    const auto& ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size() && i < width; ++i) {
        if (!std::isfinite(ev[i].real()) || !std::isfinite(ev[i].imag()))
            throw Error(ErrorKind::numerical_failure, "non-finite eigenvalue");
        out[i] = ev[i];
    }
    return out;
}

double spectral_weight(const Eigen::MatrixXcd& a) {
    if (a.rows() != a.cols()) throw Error(ErrorKind::shape_error, "spectral weight needs a square matrix");
    if (a.size() == 0) return 0.0;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(a, false);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::numerical_failure, "eigensolver did not converge");
    return es.eigenvalues().cwiseAbs().sum();
}

double spectral_weight(const OperatorPoint& a) { return a.eigenvalues().cwiseAbs().sum(); }

// --- entropy --------------------------------------------------------------------

std::vector<TestSet> origin_exhaustion(int levels, int dims_per_level) {
    if (levels < 1 || dims_per_level < 1) throw Error(ErrorKind::invalid_argument, "origin_exhaustion needs positive sizes");
    std::vector<TestSet> out;
    for (int m = 1; m <= levels; ++m) {
        const Point origin(m, std::vector<double>(static_cast<std::size_t>(m * dims_per_level), 0.0), dims_per_level);
        out.push_back(TestSet{{Ball{origin, static_cast<double>(m), m}}, m - 1});
    }
    return out;
}

std::vector<Point> sample_test_set(const TestSet& k, int budget, std::uint64_t seed) {
    if (budget < 1) throw Error(ErrorKind::invalid_budget, "sample budget must be >= 1");
    if (k.balls.empty()) throw Error(ErrorKind::invalid_argument, "cannot sample an empty test set");
    std::vector<Point> out;
    for (const auto& ball : k.balls) {
        if (ball.center.realization() != Realization::euclidean)
            throw Error(ErrorKind::kind_mismatch, "entropy sampling needs Euclidean test sets");
        const Point center = lift(ball.center, std::max(ball.level, ball.center.level()));
        const auto dim = static_cast<std::size_t>(ball.level * center.dims_per_level());
        const auto primes = first_primes(dim + 1);
        out.push_back(center);
        std::uint64_t index = seed + 1;
        int produced = 1;
        std::vector<double> u(dim);
        const bool rejection = dim <= 4;
        while (produced < budget) {
            const std::uint64_t i = index++;
            std::vector<double> c = center.coords();
            if (rejection) {
                double norm2 = 0.0;
                for (std::size_t a = 0; a < dim; ++a) {
                    u[a] = 2.0 * radical_inverse(i, primes[a]) - 1.0;
                    norm2 += u[a] * u[a];
                }
                if (norm2 > 1.0) continue;
                for (std::size_t a = 0; a < dim; ++a) c[a] += ball.radius * u[a];
            } else {
                // Gaussian direction from paired coordinates, radius ~ v^(1/dim).
                double norm2 = 0.0;
                for (std::size_t a = 0; a < dim; ++a) {
                    const double s = std::max(radical_inverse(i, primes[a]), 1e-12);
                    const double t = radical_inverse(i + 7919 * (a + 1), primes[(a + 1) % dim]);
                    u[a] = std::sqrt(-2.0 * std::log(s)) * std::cos(2.0 * std::numbers::pi * t);
                    norm2 += u[a] * u[a];
                }
                if (norm2 == 0.0) continue;
                const double radius = ball.radius * std::pow(radical_inverse(i, primes[dim]), 1.0 / dim);
                for (std::size_t a = 0; a < dim; ++a) c[a] += radius * u[a] / std::sqrt(norm2);
            }
            out.emplace_back(center.level(), std::move(c), center.dims_per_level());
            ++produced;
        }
    }
    return out;
}

std::vector<std::size_t> greedy_cover(std::span<const Point> sample, double delta) {
    if (!(delta > 0.0)) throw Error(ErrorKind::invalid_argument, "cover radius must be positive");
    std::vector<char> covered(sample.size(), 0);
    std::vector<std::size_t> centers;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        if (covered[i]) continue;
        centers.push_back(i);
        for (std::size_t j = i; j < sample.size(); ++j)
            if (!covered[j] && distance(sample[i], sample[j]) <= delta) covered[j] = 1;
    }
    return centers;
}

int entropy_estimate(const TestSet& k, double delta, int sample_budget, std::uint64_t seed) {
    if (sample_budget < 1) throw Error(ErrorKind::invalid_budget, "sample budget must be >= 1");
    if (!(delta > 0.0)) throw Error(ErrorKind::invalid_argument, "delta must be positive");
    const auto sample = sample_test_set(k, sample_budget, seed);
    return static_cast<int>(greedy_cover(sample, delta).size());
}

// --- class checks -----------------------------------------------------------------

ClassReport check_kernel_class(const LagrangianKernel& k, std::span<const Point> sample,
                               const TestSet* excluded) {
    ClassReport rep;
    rep.sample_size = sample.size();
    rep.declared_c = k.diagonal_bound();
    const std::size_t n = sample.size();

    for (std::size_t i = 0; i < n; ++i) {
        const double v = k(sample[i], sample[i]);
        if (v < rep.diagonal_min) {
            rep.diagonal_min = v;
            rep.diagonal_witness = i;
        }
    }
    rep.condition_a = n == 0 || rep.diagonal_min >= rep.declared_c - 1e-10;

    const auto* entropy = std::get_if<EntropyVanishingParams>(&k.params());
    const auto range = k.range_radius();
    const double half_c = 0.5 * rep.declared_c;

    for (std::size_t i = 0; i < n; ++i) {
        const bool off_k = excluded == nullptr || !contains(*excluded, sample[i]);
        double nearest_drop = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double d = distance(sample[i], sample[j]);
            const double v = k(sample[i], sample[j]);
            if (j > i) ++rep.pairs_checked;
            if (off_k && v < half_c) nearest_drop = std::min(nearest_drop, d);
            if (j > i && range && d >= *range && v != 0.0)
                rep.range_violations.push_back({i, j, v, 0.0});
            // The decay bound is stated for the canonical argument order eval uses.
            if (entropy && d > entropy->plateau_radius && !canonical_less(sample[j], sample[i])) {
                const auto m = k.shell_index(sample[i], sample[j]);
                if (!m) continue;
                ++rep.decay_pairs_checked;
                const double bound =
                    std::ldexp(entropy->envelope(d), -*m) / k.entropy_normalizer(sample[i], *m);
                if (v > bound * (1.0 + 1e-12) + 1e-300) rep.decay_violations.push_back({i, j, v, bound});
            }
        }
        if (off_k && nearest_drop < rep.plateau_radius_estimate) {
            rep.plateau_radius_estimate = nearest_drop;
            rep.plateau_witness = i;
        }
    }
    return rep;
}

}  // namespace cvp
