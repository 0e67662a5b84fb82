#include <random>

#include <benchmark/benchmark.h>

#include "cvp/action.hpp"
#include "cvp/diagnostics.hpp"
#include "cvp/kernels.hpp"
#include "cvp/rng.hpp"
#include "cvp/solver.hpp"

using namespace cvp;

namespace {

std::vector<Point> line(int n) {
    std::vector<Point> g;
    for (int i = 0; i < n; ++i) g.push_back(Point(1, {-2.0 + 4.0 * i / (n - 1)}, 1));
    return g;
}

void BM_CausalKernel(benchmark::State& state) {
    const int s = static_cast<int>(state.range(0));
    const int n = static_cast<int>(state.range(1));
    Rng rng = stream(1, "bench");
    Eigen::VectorXd ev(2 * s);
    for (int i = 0; i < 2 * s; ++i) ev[i] = i < s ? 1.0 + i : -1.0 - i;
    const Point x(1, OperatorPoint::random(rng, s, n, ev, n), n);
    const Point y(1, OperatorPoint::random(rng, s, n, ev, n), n);
    const auto k = LagrangianKernel::causal_fermion({s, n});
    for (auto _ : state) benchmark::DoNotOptimize(k(x, y));
}
BENCHMARK(BM_CausalKernel)->Args({1, 8})->Args({2, 16})->Args({2, 64});

void BM_GramMatrix(benchmark::State& state) {
    const auto pts = line(static_cast<int>(state.range(0)));
    const auto k = LagrangianKernel::bounded_range({1.0, 1.0, 2.0});
    for (auto _ : state) benchmark::DoNotOptimize(gram_matrix(k, pts));
}
BENCHMARK(BM_GramMatrix)->Arg(64)->Arg(256);

void BM_SolveLevel(benchmark::State& state) {
    SolverConfig cfg;
    cfg.candidate_grid = line(static_cast<int>(state.range(0)));
    const auto k = LagrangianKernel::bounded_range({1.0, 1.0, 2.0});
    for (auto _ : state) benchmark::DoNotOptimize(solve_level(k, cfg));
}
BENCHMARK(BM_SolveLevel)->Arg(41)->Arg(121)->Unit(benchmark::kMillisecond);

void BM_Dimension(benchmark::State& state) {
    Rng rng = stream(2, "bench");
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<Point> pts;
    for (int i = 0; i < state.range(0); ++i) pts.push_back(Point(1, {u(rng), u(rng)}, 2));
    const std::vector<double> radii{0.002, 0.004, 0.008, 0.016, 0.032};
    for (auto _ : state) benchmark::DoNotOptimize(estimate_dimension(pts, radii));
}
BENCHMARK(BM_Dimension)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
