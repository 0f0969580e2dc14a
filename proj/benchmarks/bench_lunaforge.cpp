#include <benchmark/benchmark.h>

#include <cstdint>

#include "lunaforge/crater.hpp"
#include "lunaforge/dem.hpp"
#include "lunaforge/forge.hpp"
#include "lunaforge/mesh.hpp"
#include "lunaforge/point_process.hpp"
#include "lunaforge/rng.hpp"

using namespace lunaforge;

namespace {

Dem noise_dem(int side) {
    Dem dem(side, side, 0.05);
    RngStream rng(1, "bench/dem");
    for (float& v : dem.elevations()) v = static_cast<float>(rng.uniform(-0.5, 0.5));
    return dem;
}

void BM_MakeStamp(benchmark::State& state) {
    const double radius = static_cast<double>(state.range(0));
    const CraterSpec spec{0.0, 0.0, radius, 0.4, {{0.03, 2, 0.1}, {0.02, 3, 1.0}, {0.01, 4, 2.0}}, 3};
    const auto& profile = builtin_profiles()[spec.profile_index];
    for (auto _ : state) benchmark::DoNotOptimize(make_stamp(spec, profile, 0.04));
    const auto side = stamp_side(radius, 0.04);
    state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_MakeStamp)->Arg(1)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_StampThroughput(benchmark::State& state) {
    const auto count = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(measure_stamp_throughput(count, 0.04, 0.5, 10.0, 1));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_StampThroughput)->Arg(200)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_Randomize(benchmark::State& state) {
    const double side = static_cast<double>(state.range(0)) * 0.05;
    ForgeConfig config;
    config.base = FlatBase{side, side, 0.0f};
    config.resolution = 0.05;
    ScatterRule rock;
    rock.asset_id = "rock";
    rock.process.intensity = 0.5;
    config.assets = {rock};
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(randomize(config, seed++));
}
BENCHMARK(BM_Randomize)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_DemToMesh(benchmark::State& state) {
    const Dem dem = noise_dem(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(dem_to_mesh(dem));
    state.SetItemsProcessed(state.iterations() * dem.size());
}
BENCHMARK(BM_DemToMesh)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_CollisionMesh(benchmark::State& state) {
    const Dem dem = noise_dem(1024);
    const int factor = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(collision_mesh(dem, factor));
}
BENCHMARK(BM_CollisionMesh)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_HardcorePoisson(benchmark::State& state) {
    const SampleDomain domain = SampleDomain::rectangle(100.0, 100.0);
    const HardcoreParams params{0.5, 1.0, HardcoreMode::per_mark, 100};
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(sample_hardcore_poisson(domain, 0.05, params, RngStream(seed++, "bench/hc")));
}
BENCHMARK(BM_HardcorePoisson)->Unit(benchmark::kMillisecond);

void BM_Thomas(benchmark::State& state) {
    const SampleDomain domain = SampleDomain::rectangle(100.0, 100.0);
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(sample_thomas(domain, 0.05, 10.0, 0.8, RngStream(seed++, "bench/thomas")));
}
BENCHMARK(BM_Thomas)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
