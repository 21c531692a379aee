// Compares the OpenMP kernels against their serial reference implementations.
#include <benchmark/benchmark.h>

#include <random>

#include "sacc/engine.hpp"
#include "sacc/eyedata.hpp"
#include "sacc/kde.hpp"

namespace {

constexpr int kW = 1024;
constexpr int kH = 768;

std::vector<sacc::FixationPoint> random_fixations(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(0.0, kW - 1.0), uy(0.0, kH - 1.0);
    std::vector<sacc::FixationPoint> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = {ux(rng), uy(rng), static_cast<int>(i), std::nullopt};
    return out;
}

std::vector<sacc::SaccadeSample> random_saccades(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::gamma_distribution<double> amp(2.0, 1.5);
    std::uniform_real_distribution<double> ori(0.0, 360.0);
    std::vector<sacc::SaccadeSample> out(n);
    for (auto& s : out)
        s = {std::min(amp(rng), 19.0) + 1e-3, ori(rng)};
    return out;
}

void bm_saliency_map_serial(benchmark::State& state) {
    const auto fx = random_fixations(300, 7);
    for (auto _ : state)
        benchmark::DoNotOptimize(sacc::eyedata::serial::fixation_saliency_map(fx, kW, kH, 28.0));
}

void bm_saliency_map_omp(benchmark::State& state) {
    const auto fx = random_fixations(300, 7);
    for (auto _ : state)
        benchmark::DoNotOptimize(sacc::eyedata::fixation_saliency_map(fx, kW, kH, 28.0));
}

void bm_kde_serial(benchmark::State& state) {
    const auto samples = random_saccades(10000, 11);
    sacc::kde::KdeParams p;
    for (auto _ : state)
        benchmark::DoNotOptimize(sacc::kde::serial::estimate_joint(samples, p));
}

void bm_kde_omp(benchmark::State& state) {
    const auto samples = random_saccades(10000, 11);
    sacc::kde::KdeParams p;
    for (auto _ : state)
        benchmark::DoNotOptimize(sacc::kde::estimate_joint(samples, p));
}

sacc::engine::ViewerProfile bench_profile() {
    sacc::engine::ViewerProfile profile;
    sacc::kde::KdeParams p;
    profile.prior = sacc::engine::SaccadePrior::single(
        sacc::kde::estimate_joint(random_saccades(2000, 13), p));
    return profile;
}

void bm_transition_serial(benchmark::State& state) {
    const auto profile = bench_profile();
    const auto sal = sacc::eyedata::fixation_saliency_map(random_fixations(50, 3), kW, kH, 28.0);
    sacc::engine::MemoryState mem(profile.memory_span);
    mem.push({kW / 2.0, kH / 2.0, 0, std::nullopt});
    const sacc::FixationPoint prev{kW / 3.0, kH / 3.0, 1, std::nullopt};
    for (auto _ : state)
        benchmark::DoNotOptimize(sacc::engine::serial::transition_map(prev, sal, mem, profile));
}

void bm_transition_omp(benchmark::State& state) {
    const auto profile = bench_profile();
    const auto sal = sacc::eyedata::fixation_saliency_map(random_fixations(50, 3), kW, kH, 28.0);
    sacc::engine::MemoryState mem(profile.memory_span);
    mem.push({kW / 2.0, kH / 2.0, 0, std::nullopt});
    const sacc::FixationPoint prev{kW / 3.0, kH / 3.0, 1, std::nullopt};
    for (auto _ : state)
        benchmark::DoNotOptimize(sacc::engine::transition_map(prev, sal, mem, profile));
}

BENCHMARK(bm_saliency_map_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_saliency_map_omp)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_kde_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_kde_omp)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_transition_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_transition_omp)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
