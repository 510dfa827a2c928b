#include <benchmark/benchmark.h>

#include "lorentz/billiard.hpp"
#include "lorentz/hecke.hpp"
#include "lorentz/lattice.hpp"
#include "lorentz/tail.hpp"

using namespace lorentz;

namespace {

// A pool of shifted Hecke lattices so each iteration sees a different one.
std::vector<LatticeBasis> lattice_pool(std::size_t n) {
    const HeckeSampler sampler(3, 10007);
    Rng rng(1);
    std::vector<LatticeBasis> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const LatticeBasis m = sampler.sample(rng);
        Vec x(3);
        for (int j = 0; j < 3; ++j) x[j] = rng.uniform();
        out.push_back(m.with_shift((x.transpose() * m.basis()).transpose()));
    }
    return out;
}

void BM_HeckeSample(benchmark::State& state) {
    const HeckeSampler sampler(3, 10007);
    Rng rng(2);
    for (auto _ : state) benchmark::DoNotOptimize(sampler.sample(rng));
}
BENCHMARK(BM_HeckeSample);

void BM_IsDisjointCylinder(benchmark::State& state) {
    const auto pool = lattice_pool(256);
    const Cylinder cylinder(0.0, static_cast<double>(state.range(0)) / 10.0, 1.0, Vec::Zero(2));
    std::size_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(is_disjoint(pool[i++ % pool.size()], cylinder));
}
BENCHMARK(BM_IsDisjointCylinder)->Arg(2)->Arg(10)->Arg(40);

void BM_FreePathAlpha(benchmark::State& state) {
    const auto pool = lattice_pool(256);
    const Vec axis = Vec::Zero(2);
    std::size_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(free_path_alpha(pool[i++ % pool.size()], axis, 1.0, 5.0));
}
BENCHMARK(BM_FreePathAlpha);

void BM_EnumerateBall(benchmark::State& state) {
    const auto pool = lattice_pool(64);
    const Ball ball{Vec::Zero(3), static_cast<double>(state.range(0))};
    std::size_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(enumerate_points(pool[i++ % pool.size()], ball).size());
}
BENCHMARK(BM_EnumerateBall)->Arg(2)->Arg(5);

void BM_XiEstimate(benchmark::State& state) {
    const HeckeSampler sampler(3, 10007);
    const XiQuery q = XiQuery::single(3, 2.0, 1.0);
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(xi_estimate(q, sampler, 1000, ++seed).value);
    state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_XiEstimate)->Unit(benchmark::kMillisecond);

void BM_FirstHit(benchmark::State& state) {
    const double rho = static_cast<double>(state.range(0)) / 1000.0;
    Rng rng(3);
    for (auto _ : state) {
        Vec q(3), v(3);
        do {
            for (int j = 0; j < 3; ++j) q[j] = rng.uniform();
        } while ((q - q.array().round().matrix()).norm() <= rho);
        for (int j = 0; j < 3; ++j) v[j] = rng.normal();
        benchmark::DoNotOptimize(first_hit(q, v, rho, 10.0 / (rho * rho)));
    }
}
BENCHMARK(BM_FirstHit)->Arg(20)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
