#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

#include "cvp/diagnostics.hpp"

using namespace cvp;

namespace {

std::vector<Point> uniform_cloud(int dim, int count, std::uint64_t seed) {
    Rng rng = stream(seed, "dimension-cloud");
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Point> pts;
    for (int i = 0; i < count; ++i) {
        std::vector<double> c(static_cast<std::size_t>(dim));
        for (auto& x : c) x = u(rng);
        pts.emplace_back(1, std::move(c), dim);
    }
    return pts;
}

const std::vector<double> kRadii{0.002, 0.004, 0.008, 0.016, 0.032};

}  // namespace

TEST_CASE("eigen_signature examples") {
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(3, 3);
    d(0, 0) = 1.0;
    d(1, 1) = -1.0;
    const auto s = eigen_signature(d, 1e-8);
    CHECK(s.positive == 1);
    CHECK(s.negative == 1);
    const auto z = eigen_signature(Eigen::MatrixXcd::Zero(4, 4), 1e-8);
    CHECK(z.positive + z.negative == 0);

    Eigen::MatrixXcd skew = Eigen::MatrixXcd::Zero(2, 2);
    skew(0, 1) = 1.0;
    CHECK_ERROR_KIND(eigen_signature(skew, 1e-8), ErrorKind::shape_error);
    CHECK(default_signature_tol(d) == doctest::Approx(1e-8));
}

TEST_CASE("eigen_signature against the dense oracle and under conjugation") {
    Rng rng = stream(51, "diagnostics-test");
    std::normal_distribution<double> n(0, 1);
    for (int t = 0; t < 100; ++t) {
        const auto op = fixtures::random_operator(rng, 2, 8, 2, 2, 8);
        const Eigen::MatrixXcd a = op.materialize();
        const double tol = default_signature_tol(a);
        const auto sig = eigen_signature(a, tol);
        const auto [p, q] = oracle::dense_signature(a, tol);
        CHECK(sig.positive == p);
        CHECK(sig.negative == q);
        const auto stored = eigen_signature(op, tol);
        CHECK(stored.positive == p);
        CHECK(stored.negative == q);

        Eigen::MatrixXcd g(8, 8);
        for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = {n(rng), n(rng)};
        const Eigen::MatrixXcd u = Eigen::HouseholderQR<Eigen::MatrixXcd>(g).householderQ();
        const Eigen::MatrixXcd conj = u * a * u.adjoint();
        const auto c = eigen_signature(conj, 1e-8 * 10);
        CHECK(c.positive == p);
        CHECK(c.negative == q);
        const auto scaled = eigen_signature(Eigen::MatrixXcd(3.0 * a), 1e-8);
        CHECK(scaled.positive == p);
        CHECK(scaled.negative == q);
    }
}

TEST_CASE("closure test") {
    for (int s : {1, 2})
        for (int n : {8, 16}) {
            const auto r = closure_test(s, n, 60, 7);
            CHECK(r.violations == 0);
            CHECK(r.trials == 60);
            CHECK(r.max_tail_step < 1e-8);
        }
    CHECK_ERROR_KIND(closure_test(1, 8, 0, 1), ErrorKind::invalid_argument);
}

TEST_CASE("dimension of coincident points is zero") {
    std::vector<Point> same(20, Point(1, {0.5, 0.5}, 2));
    const auto r = estimate_dimension(same, kRadii);
    CHECK(r.degenerate);
    CHECK(r.global_estimate == 0.0);
    CHECK(r.fit_quality == 1.0);
}

TEST_CASE("dimension of a segment and a square") {
    const auto seg = estimate_dimension(uniform_cloud(1, 10000, 3), kRadii);
    CHECK(seg.global_estimate >= 0.8);
    CHECK(seg.global_estimate <= 1.2);
    CHECK(seg.fit_quality >= 0.95);
    const auto sq = estimate_dimension(uniform_cloud(2, 10000, 4), kRadii);
    CHECK(sq.global_estimate >= 1.7);
    CHECK(sq.global_estimate <= 2.3);
    CHECK(sq.fit_quality >= 0.95);
    for (double l : sq.local_estimates) CHECK(l >= 0.0);
    CHECK(sq.local_estimates.size() == 10000);
}

TEST_CASE("dimension estimate is invariant under isometries") {
    auto pts = uniform_cloud(2, 1500, 5);
    const std::vector<double> radii{0.01, 0.02, 0.05, 0.1, 0.2};
    const auto base = estimate_dimension(pts, radii);
    // Rotation by a quarter turn and a translation by dyadic amounts keep distances exact.
    std::vector<Point> moved;
    for (const auto& p : pts) moved.emplace_back(1, std::vector<double>{-p.coords()[1] + 4.0, p.coords()[0] - 2.0}, 2);
    const auto r = estimate_dimension(moved, radii);
    CHECK(std::abs(r.global_estimate - base.global_estimate) <= 1e-10);

    // Generic rotation: pair counts move only for pairs sitting on a radius.
    const double th = 0.3;
    std::vector<Point> rot;
    for (const auto& p : pts) {
        const double x = p.coords()[0], y = p.coords()[1];
        rot.emplace_back(1, std::vector<double>{std::cos(th) * x - std::sin(th) * y, std::sin(th) * x + std::cos(th) * y}, 2);
    }
    const auto q = estimate_dimension(rot, radii);
    CHECK(q.pair_counts == base.pair_counts);
    CHECK(std::abs(q.global_estimate - base.global_estimate) <= 1e-10);
}

TEST_CASE("dimension preconditions") {
    const auto pts = uniform_cloud(1, 9, 6);
    CHECK_ERROR_KIND(estimate_dimension(pts, kRadii), ErrorKind::invalid_argument);
    const auto ok = uniform_cloud(1, 20, 6);
    CHECK_ERROR_KIND(estimate_dimension(ok, std::vector<double>{0.1, 0.2, 0.4}), ErrorKind::invalid_argument);
    CHECK_ERROR_KIND(estimate_dimension(ok, std::vector<double>{0.1, 1.0}), ErrorKind::invalid_argument);
}
