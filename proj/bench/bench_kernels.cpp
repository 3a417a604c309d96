// Serial reference versus OpenMP kernels. Run with OMP_NUM_THREADS set to the
// thread count of interest; the Serial rows ignore it.

#include <benchmark/benchmark.h>

#include <algorithm>
#include <numeric>

#include "tabsynth/kernels.hpp"

using namespace tabsynth;
using kernels::Exec;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(1) == 0 ? Exec::Serial : Exec::Parallel; }

void label(benchmark::State& state) { state.SetLabel(state.range(1) == 0 ? "serial" : "parallel"); }

void BM_PairwiseDistances(benchmark::State& state) {
    Rng rng(1);
    const Matrix a = uniform_matrix(state.range(0), 32, rng);
    for (auto _ : state) benchmark::DoNotOptimize(kernels::pairwise_sq_distances(a, a, exec_of(state)));
    label(state);
}

void BM_Knn(benchmark::State& state) {
    Rng rng(2);
    const Matrix a = uniform_matrix(state.range(0), 16, rng);
    for (auto _ : state) benchmark::DoNotOptimize(kernels::knn(a, a, 5, true, exec_of(state)));
    label(state);
}

void BM_TsneGradient(benchmark::State& state) {
    Rng rng(3);
    const Eigen::Index n = state.range(0);
    Matrix p = uniform_matrix(n, n, rng);
    p = p + p.transpose().eval();
    p.diagonal().setZero();
    p /= p.sum();
    const Matrix y = normal_matrix(n, 2, rng);
    Matrix grad;
    for (auto _ : state) benchmark::DoNotOptimize(kernels::tsne_gradient(p, y, 1.0, grad, exec_of(state)));
    label(state);
}

void BM_BestSplits(benchmark::State& state) {
    Rng rng(4);
    const Eigen::Index n = state.range(0), d = 20;
    const Matrix x = uniform_matrix(n, d, rng);
    std::vector<std::vector<std::uint32_t>> sorted(static_cast<std::size_t>(d));
    for (Eigen::Index f = 0; f < d; ++f) {
        auto& order = sorted[static_cast<std::size_t>(f)];
        order.resize(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0u);
        std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return x(i, f) < x(j, f); });
    }
    std::vector<int> node(static_cast<std::size_t>(n));
    std::vector<double> g(node.size()), h(node.size(), 0.25);
    kernels::NodeTotals totals[2];
    for (std::size_t i = 0; i < node.size(); ++i) {
        node[i] = static_cast<int>(i % 2);
        g[i] = uniform01(rng) - 0.5;
        totals[node[i]].g += g[i];
        totals[node[i]].h += h[i];
    }
    for (auto _ : state)
        benchmark::DoNotOptimize(kernels::best_splits(x, sorted, node, g, h, totals, 1.0, 1.0, exec_of(state)));
    label(state);
}

}  // namespace

BENCHMARK(BM_PairwiseDistances)->ArgsProduct({{500, 2000}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Knn)->ArgsProduct({{500, 2000}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TsneGradient)->ArgsProduct({{500, 1500}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BestSplits)->ArgsProduct({{5000, 20000}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
