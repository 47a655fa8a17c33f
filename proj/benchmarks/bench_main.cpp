#include <benchmark/benchmark.h>

#include <cmath>

#include "ltlab/constants.hpp"
#include "ltlab/cubes.hpp"
#include "ltlab/functionals.hpp"
#include "ltlab/presets.hpp"

using namespace ltlab;

namespace {

Configuration sampleConfig(std::size_t n) {
    Rng rng(3);
    std::vector<Vec3> p;
    for (std::size_t i = 0; i < n; ++i) p.push_back(rng.uniformInBox({{-0.5, -0.5, -0.5}, {0.5, 0.5, 0.5}}));
    return Configuration(p);
}

void BM_TrialValue(benchmark::State& state) {
    const TrialFunction f = slaterTrial(static_cast<std::size_t>(state.range(0)));
    const Configuration X = sampleConfig(f.particles());
    for (auto _ : state) benchmark::DoNotOptimize(f.value(X));
}
BENCHMARK(BM_TrialValue)->Arg(2)->Arg(3)->Arg(4)->Arg(6);

void BM_WeightedKinetic(benchmark::State& state) {
    const TrialFunction f = slaterTrial(static_cast<std::size_t>(state.range(0)));
    const Configuration X = sampleConfig(f.particles());
    for (auto _ : state) benchmark::DoNotOptimize(f.weightedKinetic(X));
}
BENCHMARK(BM_WeightedKinetic)->Arg(2)->Arg(3)->Arg(4)->Arg(6);

void BM_SymmetrizedValue(benchmark::State& state) {
    const TrialFunction f = symmetrize(presetTrial("n3-q2-blocks"));
    const Configuration X = sampleConfig(3);
    for (auto _ : state) benchmark::DoNotOptimize(f.value(X));
}
BENCHMARK(BM_SymmetrizedValue);

void BM_EnergyQ(benchmark::State& state) {
    const TrialFunction f = presetTrial("n3-q2-blocks");
    SamplingStrategy s = defaultStrategy(f, static_cast<std::uint64_t>(state.range(0)), 1);
    s.threads = 1;
    for (auto _ : state) benchmark::DoNotOptimize(energyQ(f, s).mean);
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EnergyQ)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_DensityGrid(benchmark::State& state) {
    const TrialFunction f = presetTrial("n3-q2-blocks");
    SamplingStrategy s = defaultStrategy(f, 20000, 1);
    s.threads = 1;
    for (auto _ : state)
        benchmark::DoNotOptimize(density(f, GridSpec::cubic(f.supportBox(), 24), s).totalMass());
}
BENCHMARK(BM_DensityGrid)->Unit(benchmark::kMillisecond);

void BM_GradSqrt(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const DensityGrid d = DensityGrid::fromFunction(GridSpec::cubic({{-1, -1, -1}, {1, 1, 1}}, n),
                                                    [](const Vec3& x) { return std::exp(-8.0 * norm2(x)); }, 2);
    for (auto _ : state) benchmark::DoNotOptimize(gradSqrtDensityNorm(d).value);
}
BENCHMARK(BM_GradSqrt)->Arg(16)->Arg(32)->Arg(64);

void BM_Subdivide(benchmark::State& state) {
    DensityGrid d = DensityGrid::fromFunction(GridSpec::cubic({{0, 0, 0}, {1, 1, 1}}, 32), [](const Vec3& x) {
        return 0.05 + std::exp(-50.0 * norm2(x - Vec3{0.3, 0.6, 0.4})) + std::exp(-80.0 * norm2(x - Vec3{0.7, 0.2, 0.7}));
    }, 2);
    d = d.scaled(static_cast<double>(state.range(0)) / d.totalMass());
    const MassFn mass = gridMass(d);
    for (auto _ : state) {
        CubeTree t = subdivide(mass, {{0, 0, 0}, 1.0}, 1.0);
        associate(t);
        benchmark::DoNotOptimize(t.nodes.size());
    }
}
BENCHMARK(BM_Subdivide)->Arg(50)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_MOmega(benchmark::State& state) {
    MOmegaOptions o;
    o.centers = static_cast<std::size_t>(state.range(0));
    o.refineTop = 4;
    o.refineSamples = 2048;
    o.threads = 1;
    for (auto _ : state) benchmark::DoNotOptimize(estimateMOmega(std::vector<Vec3>{}, o).raw);
}
BENCHMARK(BM_MOmega)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_QuadratureN2(benchmark::State& state) {
    const TrialFunction f = gaussianSlaterN2();
    for (auto _ : state) benchmark::DoNotOptimize(energyQuadrature(f, static_cast<std::size_t>(state.range(0))).value);
}
BENCHMARK(BM_QuadratureN2)->Arg(6)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
