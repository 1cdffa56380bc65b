#include <benchmark/benchmark.h>

#include "lcurve/lcurve.hpp"

using namespace lcurve;

namespace {

NetworkArch reference_arch(int d)
{
    return make_arch(3, Activation::relu, KernelKind::ntk, {1, 1, 1, 1}, {1, 1, 1, 1}, d, VarianceConvention::fan_in);
}

void BM_KernelSeries(benchmark::State& state)
{
    const auto a = reference_arch(50);
    const int Q = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(build_kernel_series(a, 50, Q));
}
BENCHMARK(BM_KernelSeries)->Arg(32)->Arg(128)->Arg(512);

void BM_Eigenvalues(benchmark::State& state)
{
    const auto tk = trim(build_kernel_series(reference_arch(50), 50, 32), static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(eigenvalues(tk, 0.0));
}
BENCHMARK(BM_Eigenvalues)->Arg(3)->Arg(10)->Arg(32);

void BM_LearningCurve(benchmark::State& state)
{
    const auto sp = eigenvalues(trim(build_kernel_series(reference_arch(50), 50, 32), 3), 0.0, 3);
    const auto tgt = spectral_target(50, {0.0, 0.5, 0.5});
    std::vector<double> etas;
    for (int i = 0; i < 100; ++i) etas.push_back(10.0 + 10.0 * i);
    for (auto _ : state) benchmark::DoNotOptimize(learning_curve(sp, tgt, etas));
}
BENCHMARK(BM_LearningCurve);

void BM_GprPredict(benchmark::State& state)
{
    const int d = 50, N = static_cast<int>(state.range(0));
    const auto cfg = gpr_config(build_kernel_series(reference_arch(d), d, 32), 0.0, true);
    const auto x = sphere_sample(d, N, 1), xt = sphere_sample(d, 500, 2);
    const auto tgt = make_zonal(d, {0.0, 0.5, 0.5}, 3);
    const Eigen::MatrixXd y = eval_target_rows(tgt, x);
    for (auto _ : state) benchmark::DoNotOptimize(gpr_predict(cfg, x, y, xt));
}
BENCHMARK(BM_GprPredict)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Quadrature(benchmark::State& state)
{
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(sphere_quadrature(50, n));
}
BENCHMARK(BM_Quadrature)->Arg(256)->Arg(2048);

void BM_PredictedLoss(benchmark::State& state)
{
    ArchTemplate tm;
    const auto tgt = spectral_target(10, {0.0, 1 / 3.0, 1 / 3.0, 1 / 3.0});
    const std::vector<double> s{1.4, 0.05, 1.4, 0.05};
    for (auto _ : state) benchmark::DoNotOptimize(predicted_loss(tm, s, tgt, 1000, 3));
}
BENCHMARK(BM_PredictedLoss);

} // namespace

BENCHMARK_MAIN();
