#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

#include "cvp/solver.hpp"

using namespace cvp;
using fixtures::euclid;

namespace {

std::vector<Point> line_grid(int n, double spacing) {
    std::vector<Point> g;
    for (int i = 0; i < n; ++i) g.push_back(euclid({spacing * i}));
    return g;
}

SolverConfig config_for(std::vector<Point> grid, bool normalize = true) {
    SolverConfig cfg;
    cfg.level = 1;
    cfg.candidate_grid = std::move(grid);
    cfg.normalize_to_one = normalize;
    return cfg;
}

const LagrangianKernel kHat = LagrangianKernel::bounded_range({1.0, 1.0, 2.0});

}  // namespace

TEST_CASE("solve_weights on small Gram matrices") {
    Eigen::MatrixXd one(1, 1);
    one << 3.0;
    CHECK(solve_weights(one, 2.5, 1e-12).weights[0] == 2.5);

    Eigen::MatrixXd id = Eigen::MatrixXd::Identity(2, 2);
    const auto a = solve_weights(id, 1.0, 1e-12);
    CHECK(a.weights[0] == doctest::Approx(0.5));
    CHECK(a.weights[1] == doctest::Approx(0.5));
    CHECK(a.objective == doctest::Approx(0.5));
    CHECK(std::abs(a.objective - oracle::simplex_grid_min(id, 1.0, 1e-3)) <= 1e-6);

    Eigen::MatrixXd close(2, 2);
    close << 1.0, 0.9, 0.9, 1.0;
    const auto b = solve_weights(close, 1.0, 1e-12);
    CHECK(b.weights[0] == doctest::Approx(0.5));
    CHECK(b.objective == doctest::Approx(0.95));
    // Stationarity along the constraint: d/dw [w^2 + 1.8 w (1-w) + (1-w)^2] = 0.4 w - 0.2.
    CHECK(std::abs(0.4 * b.weights[0] - 0.2) <= 1e-10);
    CHECK(std::abs(b.objective - oracle::simplex_grid_min(close, 1.0, 1e-3)) <= 1e-6);
    CHECK(b.kkt_residual <= 1e-12);

    CHECK_ERROR_KIND(solve_weights(Eigen::MatrixXd(0, 0), 1.0, 1e-9), ErrorKind::invalid_argument);
    CHECK_ERROR_KIND(solve_weights(id, 0.0, 1e-9), ErrorKind::invalid_argument);
}

TEST_CASE("solve_weights matches the subset oracle on random Gram matrices") {
    Rng rng = stream(31, "solver-test");
    std::uniform_real_distribution<double> u(-2, 2);
    for (int t = 0; t < 60; ++t) {
        const int n = 2 + t % 5;
        std::vector<Point> pts;
        for (int i = 0; i < n; ++i) pts.push_back(euclid({u(rng), u(rng)}));
        const Eigen::MatrixXd g = gram_matrix(kHat, pts);
        const auto ws = solve_weights(g, 1.0, 1e-10);
        CHECK(std::abs(ws.weights.sum() - 1.0) <= 1e-12);
        CHECK(ws.weights.minCoeff() >= 0.0);
        CHECK(ws.kkt_residual <= 1e-10);
        CHECK(std::abs(ws.objective - oracle::subset_qp_min(g, 1.0)) <= 1e-9);
        // KKT as EL: on the support the potential equals lambda / 2.
        const Eigen::VectorXd gw = g * ws.weights;
        for (int i = 0; i < n; ++i) {
            if (ws.weights[i] > 0.0) CHECK(std::abs(gw[i] - 0.5 * ws.lambda) <= 2e-10);
            else CHECK(gw[i] >= 0.5 * ws.lambda - 2e-10);
        }
    }
}

TEST_CASE("grid-search oracle agrees for three points") {
    const std::vector<Point> pts{euclid({0.0}), euclid({0.3}), euclid({0.9})};
    const Eigen::MatrixXd g = gram_matrix(kHat, pts);
    const auto ws = solve_weights(g, 1.0, 1e-12);
    const double grid = oracle::simplex_grid_min(g, 1.0, 1e-3);
    CHECK(ws.objective <= grid + 1e-12);
    CHECK(grid - ws.objective <= 1e-5);
}

TEST_CASE("solve_level: single point and symmetric pair") {
    const auto k = LagrangianKernel::bounded_range({2.0, 1.0, 1.0});
    const auto one = solve_level(k, config_for({euclid({0.0})}));
    REQUIRE(one.measure.size() == 1);
    CHECK(one.measure.atoms()[0].weight == doctest::Approx(0.5));
    CHECK(one.s_param == 1.0);
    CHECK(std::abs(ell(k, one.measure, euclid({0.0}), 1.0)) <= 1e-12);
    CHECK(one.converged);

    const auto two = solve_level(kHat, config_for({euclid({-0.25}), euclid({0.25})}));
    REQUIRE(two.measure.size() == 2);
    CHECK(two.measure.atoms()[0].weight == doctest::Approx(two.measure.atoms()[1].weight).epsilon(1e-12));
    CHECK(two.converged);
}

TEST_CASE("solve_level matches exhaustive subset search on five points") {
    const auto grid = std::vector<Point>{euclid({0.0}), euclid({0.2}), euclid({0.5}), euclid({0.6}), euclid({1.4})};
    const auto sol = solve_level(kHat, config_for(grid, false));
    const Eigen::MatrixXd g = gram_matrix(kHat, grid);
    CHECK(std::abs(sol.action_value - oracle::subset_qp_min(g, 1.0)) <= 1e-4);
    CHECK(std::abs(sol.action_value - oracle::simplex_grid_min(g, 1.0, 0.02)) <= 1e-3);
    CHECK(sol.converged);
}

TEST_CASE("solve_level invariants on a lattice") {
    auto cfg = config_for(line_grid(31, 0.1));
    const auto sol = solve_level(kHat, cfg);
    CHECK(sol.converged);
    CHECK(sol.el_report.support_residual <= 10 * cfg.qp_tolerance);
    CHECK(sol.el_report.exterior_violation <= cfg.insertion_tolerance);
    for (const auto& a : sol.measure.atoms()) CHECK(std::abs(potential(kHat, sol.measure, a.point) - 1.0) <= 10 * cfg.qp_tolerance);
    for (std::size_t i = 1; i < sol.action_history.size(); ++i)
        CHECK(sol.action_history[i] <= sol.action_history[i - 1] + 1e-12);

    // Unnormalized runs keep the volume.
    auto raw = cfg;
    raw.normalize_to_one = false;
    raw.initial_volume = 3.0;
    const auto r = solve_level(kHat, raw);
    CHECK(std::abs(r.measure.total_volume() - 3.0) <= 1e-9);
    CHECK(std::abs(r.s_param - 0.5 * r.lambda) <= 1e-15);

    // Determinism.
    const auto again = solve_level(kHat, cfg);
    REQUIRE(again.measure.size() == sol.measure.size());
    for (std::size_t i = 0; i < sol.measure.size(); ++i) {
        CHECK(again.measure.atoms()[i].weight == sol.measure.atoms()[i].weight);
        CHECK(same_representation(again.measure.atoms()[i].point, sol.measure.atoms()[i].point));
    }
}

TEST_CASE("solver config validation") {
    SolverConfig cfg;
    CHECK_ERROR_KIND(cfg.validate(), ErrorKind::invalid_argument);
    cfg.candidate_grid = {Point(2, {0.0, 1.0}, 1)};
    CHECK_ERROR_KIND(cfg.validate(), ErrorKind::invalid_argument);
    cfg.level = 2;
    CHECK_NOTHROW(cfg.validate());
    cfg.qp_tolerance = 0.0;
    CHECK_ERROR_KIND(cfg.validate(), ErrorKind::invalid_argument);
}

TEST_CASE("verify_minimality") {
    const auto k = LagrangianKernel::bounded_range({2.0, 1.0, 1.0});
    const auto one = solve_level(k, config_for({euclid({0.0})}));
    const auto id = verify_minimality(k, one, 1, 7);
    CHECK(id.min_delta == 0.0);
    CHECK(id.worst_move == "identity");

    const auto sol = solve_level(kHat, config_for(line_grid(21, 0.1)));
    const auto good = verify_minimality(kHat, sol, 300, 9);
    CHECK(good.min_delta >= -1e-8);
    CHECK(good.negative_count == 0);

    const auto broken = corrupt_solution(kHat, sol);
    CHECK(std::abs(broken.measure.total_volume() - sol.measure.total_volume()) <= 1e-12);
    const auto bad = verify_minimality(kHat, broken, 300, 9);
    CHECK(bad.min_delta < 0.0);
    CHECK(bad.negative_count > 0);
    CHECK_ERROR_KIND(verify_minimality(kHat, sol, 0, 1), ErrorKind::invalid_argument);
}
