#include <atomic>
#include <numeric>
#include <vector>

#include "doctest.h"

#include "cvp/error.hpp"
#include "cvp/numeric.hpp"
#include "cvp/parallel.hpp"
#include "cvp/rng.hpp"

using namespace cvp;

TEST_CASE("pairwise_sum matches exact sums and is order-pinned") {
    std::vector<double> v(1000);
    std::iota(v.begin(), v.end(), 1.0);
    CHECK(pairwise_sum(v) == 500500.0);
    CHECK(pairwise_sum(std::vector<double>{}) == 0.0);

    // 1 + many tiny terms: tree summation keeps them.
    std::vector<double> w(1 << 16, 1e-16);
    w[0] = 1.0;
    CHECK(pairwise_sum(w) == doctest::Approx(1.0 + 65535e-16).epsilon(1e-15));
    CHECK(pairwise_dot(v, v) == doctest::Approx(333833500.0));
}

TEST_CASE("fit_line recovers slope and intercept") {
    std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
    const auto f = fit_line(x, y);
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(f.r_squared == doctest::Approx(1.0));

    std::vector<double> flat{2, 2, 2, 2};
    CHECK(fit_line(x, flat).r_squared == 1.0);
    CHECK(fit_line(flat, x).slope == 0.0);
}

TEST_CASE("named streams are reproducible and independent") {
    Rng a = stream(7, "solver"), b = stream(7, "solver"), c = stream(7, "closure"), d = stream(8, "solver");
    const auto va = a();
    CHECK(va == b());
    CHECK(va != c());
    CHECK(va != d());
}

TEST_CASE("parallel_for visits each index once for any worker count") {
    for (std::size_t workers : {1u, 2u, 5u}) {
        set_worker_count(workers);
        std::vector<std::atomic<int>> hits(97);
        parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
        for (auto& h : hits) CHECK(h.load() == 1);
    }
    set_worker_count(3);
    CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                        if (i == 4) throw Error(ErrorKind::numerical_failure, "boom");
                    }),
                    Error);
    set_worker_count(1);
}
