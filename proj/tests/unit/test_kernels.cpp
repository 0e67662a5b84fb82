#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

#include "cvp/kernels.hpp"

using namespace cvp;
using fixtures::euclid;

namespace {

LagrangianKernel causal(int s, int n) { return LagrangianKernel::causal_fermion({s, n}); }

Point op_point(const OperatorPoint& op) { return Point(1, op, op.hilbert_trunc()); }

TestSet segment(double center, double radius, int id = 0) { return {{Ball{euclid({center}), radius, 1}}, id}; }

LagrangianKernel entropy_kernel(double c, double delta, std::vector<std::pair<double, double>> f) {
    EntropyVanishingParams p;
    p.plateau = c;
    p.plateau_radius = delta;
    p.envelope = DistanceTable(std::move(f));
    for (int m = 1; m <= 4; ++m) p.exhaustion.push_back(segment(0.0, 2.0 * m, m));
    p.sample_budget = 64;
    return LagrangianKernel::entropy_vanishing(std::move(p));
}

}  // namespace

TEST_CASE("bounded range examples") {
    const auto k = LagrangianKernel::bounded_range({1.0, 2.0, 1.0});
    CHECK(k(euclid({0.0}), euclid({1.0})) == doctest::Approx(0.5));
    CHECK(k(euclid({0.0}), euclid({2.5})) == 0.0);
    CHECK(k(euclid({0.0}), euclid({2.0})) == 0.0);
    CHECK(k(euclid({0.3}), euclid({0.3})) == 1.0);
    CHECK(k.kind() == KernelKind::bounded_range);
    CHECK(k.range_radius() == 2.0);
    CHECK_ERROR_KIND(LagrangianKernel::bounded_range({1.0, 1.0, 0.5}), ErrorKind::invalid_argument);
    CHECK_ERROR_KIND(LagrangianKernel::bounded_range({0.0, 1.0, 1.0}), ErrorKind::invalid_argument);

    const auto k2 = LagrangianKernel::bounded_range({3.0, 1.5, 2.0});
    Rng rng = stream(5, "kernel-test");
    std::uniform_real_distribution<double> u(-2, 2);
    for (int t = 0; t < 2000; ++t) {
        const Point x = euclid({u(rng), u(rng)}), y = euclid({u(rng), u(rng)});
        const double d = distance(x, y);
        const double v = k2(x, y);
        if (d >= 1.5) CHECK(v == 0.0);
        else CHECK(std::abs(v - 3.0 * (1 - d / 1.5) * (1 - d / 1.5)) <= 1e-12);
    }
}

TEST_CASE("causal kernel on simple operators") {
    const auto k = causal(1, 4);
    const Point zero = op_point(OperatorPoint::zero(1, 4));
    CHECK(k(zero, zero) == 0.0);

    Eigen::VectorXd ev(2);
    ev << 2.0, -1.0;
    const OperatorPoint x(ev, Eigen::MatrixXcd::Identity(4, 2), 1);
    CHECK(std::abs(k(op_point(x), op_point(x)) - 4.5) <= 1e-12);
    CHECK(std::abs(oracle::causal_lagrangian_dense(x.materialize(), x.materialize(), 1) - 4.5) <= 1e-10);

    // Orthogonal frames: xy = 0.
    Eigen::MatrixXcd f = Eigen::MatrixXcd::Zero(4, 2);
    f(2, 0) = 1.0;
    f(3, 1) = 1.0;
    const OperatorPoint y(ev, f, 1);
    CHECK(k(op_point(x), op_point(y)) == 0.0);

    CHECK_ERROR_KIND(k(euclid({0.0}), euclid({1.0})), ErrorKind::kind_mismatch);
    CHECK_ERROR_KIND(k(op_point(OperatorPoint::zero(1, 3)), op_point(OperatorPoint::zero(1, 3))), ErrorKind::kind_mismatch);
}

TEST_CASE("causal kernel: reduced spectrum agrees with the dense product") {
    Rng rng = stream(6, "kernel-test");
    double worst = 0.0;
    for (int t = 0; t < 400; ++t) {
        const int s = 1 + t % 2;
        const int n = 2 * s + (t % 13);
        const auto k = causal(s, n);
        const auto a = fixtures::random_operator(rng, s, n);
        const auto b = fixtures::random_operator(rng, s, n);
        const double reduced = k(op_point(a), op_point(b));
        const double dense = oracle::causal_lagrangian_dense(a.materialize(), b.materialize(), s);
        worst = std::max(worst, std::abs(reduced - std::max(dense, 0.0)));
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("kernel symmetry and nonnegativity over random pairs") {
    Rng rng = stream(7, "kernel-test");
    const auto k = causal(2, 6);
    int asym = 0;
    double most_negative = 0.0;
    for (int t = 0; t < 10000; ++t) {
        const Point x = op_point(fixtures::random_operator(rng, 2, 6));
        const Point y = op_point(fixtures::random_operator(rng, 2, 6));
        const double a = k(x, y), b = k(y, x);
        if (a != b) ++asym;
        most_negative = std::min(most_negative, a);
    }
    CHECK(asym == 0);
    CHECK(most_negative >= -1e-10);

    std::uniform_real_distribution<double> u(-3, 3);
    const auto br = LagrangianKernel::bounded_range({1.0, 1.0, 2.0});
    const auto ut = LagrangianKernel::user_table({DistanceTable({{0.0, 2.0}, {1.0, 0.5}, {2.0, 0.0}})}, 2.0);
    const auto ev = entropy_kernel(1.0, 0.5, {{0.5, 1.0}, {4.0, 0.1}});
    for (int t = 0; t < 10000; ++t) {
        const Point x = euclid({u(rng)}), y = euclid({u(rng)});
        for (const auto* kk : {&br, &ut, &ev}) {
            const double a = (*kk)(x, y), b = (*kk)(y, x);
            if (a != b) ++asym;
            most_negative = std::min(most_negative, a);
        }
    }
    CHECK(asym == 0);
    CHECK(most_negative >= 0.0);
}

TEST_CASE("spectral weight") {
    CHECK(spectral_weight(Eigen::MatrixXcd::Zero(3, 3)) == 0.0);
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(2, 2);
    d(0, 0) = 3.0;
    d(1, 1) = -4.0;
    CHECK(spectral_weight(d) == doctest::Approx(7.0));
    Rng rng = stream(8, "kernel-test");
    std::normal_distribution<double> n(0, 1);
    for (int t = 0; t < 50; ++t) {
        Eigen::MatrixXcd a(4, 4);
        for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = {n(rng), n(rng)};
        CHECK(std::abs(spectral_weight(a) - oracle::spectral_weight(a)) <= 1e-8);
    }
    CHECK_ERROR_KIND(spectral_weight(Eigen::MatrixXcd::Zero(2, 3)), ErrorKind::shape_error);
}

TEST_CASE("distance table interpolation") {
    const DistanceTable t({{1.0, 4.0}, {2.0, 2.0}, {4.0, 1.0}});
    CHECK(t(0.0) == 4.0);
    CHECK(t(1.5) == doctest::Approx(3.0));
    CHECK(t(3.0) == doctest::Approx(1.5));
    CHECK(t(4.0) == 1.0);
    CHECK(t(4.0001) == 0.0);
    CHECK(t.nonincreasing());
    CHECK_FALSE(DistanceTable({{0.0, 1.0}, {1.0, 2.0}}).nonincreasing());
    CHECK_ERROR_KIND(DistanceTable({{1.0, 1.0}, {1.0, 0.5}}), ErrorKind::invalid_argument);
    CHECK_ERROR_KIND(DistanceTable({{1.0, -1.0}}), ErrorKind::invalid_argument);
}

TEST_CASE("entropy estimates") {
    // Single point: radius-zero ball.
    CHECK(entropy_estimate(segment(0.3, 0.0), 0.1, 16) == 1);
    // Segment [0, 1], delta 0.3: exact covering number 2; greedy stays within one.
    const int e = entropy_estimate(segment(0.5, 0.5), 0.3, 400);
    CHECK(e >= oracle::segment_cover(1.0, 0.3));
    CHECK(e <= 3);
    CHECK_ERROR_KIND(entropy_estimate(segment(0.0, 1.0), 0.3, 0), ErrorKind::invalid_budget);
    CHECK_ERROR_KIND(entropy_estimate(segment(0.0, 1.0), 0.0, 8), ErrorKind::invalid_argument);
    // Deterministic.
    CHECK(entropy_estimate(segment(0.5, 0.5), 0.05, 200) == entropy_estimate(segment(0.5, 0.5), 0.05, 200));
}

TEST_CASE("greedy cover is a cover and is monotone in delta") {
    const TestSet disc{{Ball{euclid({0.0, 0.0}), 1.0, 1}}, 0};
    const auto sample = sample_test_set(disc, 300);
    CHECK(sample.size() == 300);
    for (const auto& p : sample) CHECK(distance(p, euclid({0.0, 0.0})) <= 1.0 + 1e-12);
    std::size_t previous = sample.size() + 1;
    for (double delta : {0.05, 0.1, 0.2, 0.4, 0.8, 1.6}) {
        const auto centers = greedy_cover(sample, delta);
        for (const auto& p : sample) {
            const bool covered = std::any_of(centers.begin(), centers.end(),
                                             [&](std::size_t c) { return distance(p, sample[c]) <= delta; });
            CHECK(covered);
        }
        CHECK(centers.size() <= previous);
        previous = centers.size();
    }
}

TEST_CASE("greedy cover on the 10x10 grid stays within twice the exact cover") {
    std::vector<Point> grid;
    std::vector<Eigen::VectorXd> raw;
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) {
            const double x = i / 9.0, y = j / 9.0;
            grid.push_back(euclid({x, y}));
            raw.emplace_back(Eigen::Vector2d(x, y));
        }
    const int exact = oracle::exact_discrete_cover(raw, 0.5);
    const auto greedy = static_cast<int>(greedy_cover(grid, 0.5).size());
    CHECK(greedy >= exact);
    CHECK(greedy <= 2 * exact);
}

TEST_CASE("origin exhaustion") {
    const auto k = origin_exhaustion(3, 2);
    REQUIRE(k.size() == 3);
    for (int m = 1; m <= 3; ++m) {
        const Ball& b = k[static_cast<std::size_t>(m - 1)].balls.at(0);
        CHECK(b.level == m);
        CHECK(b.radius == m);
        CHECK(b.center.level() == m);
        CHECK(distance(b.center, lift(euclid({0.0, 0.0}), m)) == 0.0);
    }
    CHECK(contains(k[1], euclid({1.5, 0.0, 0.0, 0.5}, 2)));
    CHECK_FALSE(contains(k[0], euclid({0.5, 0.0, 0.0, 0.5}, 2)));
    CHECK_ERROR_KIND(origin_exhaustion(0, 1), ErrorKind::invalid_argument);
}

TEST_CASE("entropy kernel structure") {
    const auto k = entropy_kernel(2.0, 0.5, {{0.5, 1.0}, {6.0, 0.2}});
    const auto& p = std::get<EntropyVanishingParams>(k.params());
    CHECK(std::abs(p.normalizer() - 2.0) <= 1e-12);
    CHECK(k(euclid({0.0}), euclid({0.4})) == 2.0);
    CHECK(k(euclid({0.0}), euclid({7.0})) == 0.0);
    CHECK(k.anchor_index(euclid({0.0})) == 1);
    CHECK(k.anchor_index(euclid({3.0})) == 2);
    CHECK_FALSE(k.anchor_index(euclid({100.0})).has_value());
    CHECK(k.shell_index(euclid({0.0}), euclid({1.0})) == 1);
    CHECK(k.shell_index(euclid({0.0}), euclid({3.0})) == 2);
    CHECK(k.exhaustion_entropy().size() == 4);
    CHECK(std::is_sorted(k.exhaustion_entropy().begin(), k.exhaustion_entropy().end()));

    // Beyond the plateau the value is the damped envelope.
    const Point x = euclid({0.0}), y = euclid({3.0});
    const double expected = std::ldexp(p.envelope(3.0), -2) / k.entropy_normalizer(x, 2);
    CHECK(k(x, y) == doctest::Approx(std::min(2.0, expected)));

    EntropyVanishingParams bad = p;
    bad.envelope = DistanceTable({{0.0, 1.0}, {1.0, 2.0}});
    CHECK_ERROR_KIND(LagrangianKernel::entropy_vanishing(bad), ErrorKind::invalid_argument);
    bad = p;
    bad.sample_budget = 0;
    CHECK_ERROR_KIND(LagrangianKernel::entropy_vanishing(bad), ErrorKind::invalid_budget);
}

TEST_CASE("class checks") {
    std::vector<Point> sample;
    for (int i = 0; i <= 40; ++i) sample.push_back(euclid({-4.0 + 0.2 * i}));

    const auto br = LagrangianKernel::bounded_range({1.0, 1.0, 2.0});
    const auto r1 = check_kernel_class(br, sample);
    CHECK(r1.passed());
    CHECK(r1.range_violations.empty());
    CHECK(r1.pairs_checked == 41 * 40 / 2);

    // Overclaimed diagonal bound.
    const auto r2 = check_kernel_class(br.with_diagonal_bound(1.5), sample);
    CHECK_FALSE(r2.condition_a);
    CHECK(r2.diagonal_min == 1.0);
    CHECK(r2.diagonal_witness < sample.size());

    // A table that leaks past its claimed range.
    const auto leaky = LagrangianKernel::user_table({DistanceTable({{0.0, 1.0}, {2.0, 0.5}})}, 1.0, 1.0);
    CHECK_FALSE(check_kernel_class(leaky, sample).range_violations.empty());

    // Entropy kernel with an envelope below the required decay: no decay violations, checked directly.
    const auto ev = entropy_kernel(1.0, 0.5, {{0.5, 0.8}, {6.0, 0.05}});
    const auto r3 = check_kernel_class(ev, sample);
    CHECK(r3.decay_violations.empty());
    CHECK(r3.decay_pairs_checked > 0);
    const auto& p = std::get<EntropyVanishingParams>(ev.params());
    for (std::size_t i = 0; i < sample.size(); ++i)
        for (std::size_t j = 0; j < sample.size(); ++j) {
            const Point& a = canonical_less(sample[j], sample[i]) ? sample[j] : sample[i];
            const Point& b = &a == &sample[i] ? sample[j] : sample[i];
            const double d = distance(a, b);
            const auto m = ev.shell_index(a, b);
            if (d <= 0.5 || !m) continue;
            CHECK(ev(a, b) <= std::ldexp(p.envelope(d), -*m) / ev.entropy_normalizer(a, *m) + 1e-15);
        }
    CHECK(r3.plateau_radius_estimate >= 0.5);
}
