#pragma once

#include <random>
#include <vector>

#include "doctest.h"

#include "cvp/error.hpp"
#include "cvp/rng.hpp"
#include "cvp/space.hpp"

#define CHECK_ERROR_KIND(expr, expected_kind)                  \
    do {                                                       \
        bool thrown_ = false;                                  \
        try {                                                  \
            (void)(expr);                                      \
        } catch (const cvp::Error& e_) {                       \
            thrown_ = true;                                    \
            CHECK(e_.kind() == (expected_kind));               \
        }                                                      \
        CHECK_MESSAGE(thrown_, "expected a cvp::Error: " #expr); \
    } while (0)

namespace fixtures {

/// Random admissible operator: p positive and q negative eigenvalues of size
/// in [0.5, 2], frame supported on the first `active` basis vectors.
inline cvp::OperatorPoint random_operator(cvp::Rng& rng, int s, int n, int p, int q, int active) {
    std::uniform_real_distribution<double> mag(0.5, 2.0);
    Eigen::VectorXd ev(p + q);
    for (int i = 0; i < p; ++i) ev[i] = mag(rng);
    for (int i = 0; i < q; ++i) ev[p + i] = -mag(rng);
    return cvp::OperatorPoint::random(rng, s, n, ev, active);
}

inline cvp::OperatorPoint random_operator(cvp::Rng& rng, int s, int n) {
    std::uniform_int_distribution<int> count(0, s);
    int p = count(rng), q = count(rng);
    if (p + q == 0) p = 1;
    return random_operator(rng, s, n, p, q, n);
}

inline cvp::Point euclid(std::vector<double> c, int level = 1) {
    const int dpl = static_cast<int>(c.size()) / level;
    return cvp::Point(level, std::move(c), dpl);
}

}  // namespace fixtures
