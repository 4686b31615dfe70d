#include "iaa/agreement.hpp"
#include "iaa/learn/network.hpp"
#include "iaa/stats.hpp"

#include "oracles.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

std::pair<iaa::BinaryMask, iaa::BinaryMask> mask_pair(int side) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(side));
    return {oracle::random_mask(rng, side, side), oracle::random_mask(rng, side, side)};
}

void BM_Dice(benchmark::State& state) {
    const auto [a, b] = mask_pair(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(iaa::dice(a, b));
}
BENCHMARK(BM_Dice)->Arg(64)->Arg(256)->Arg(1024);

void BM_HausdorffDistanceTransform(benchmark::State& state) {
    const auto [a, b] = mask_pair(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(iaa::hausdorff(a, b));
}
BENCHMARK(BM_HausdorffDistanceTransform)->Arg(32)->Arg(64)->Arg(256);

void BM_HausdorffBruteForce(benchmark::State& state) {
    const auto [a, b] = mask_pair(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(oracle::hausdorff(a, b));
}
BENCHMARK(BM_HausdorffBruteForce)->Arg(32)->Arg(64);

void BM_PairwiseFiveMasks(benchmark::State& state) {
    std::mt19937_64 rng(5);
    std::vector<iaa::BinaryMask> masks;
    for (int i = 0; i < 5; ++i) masks.push_back(oracle::random_mask(rng, 256, 256));
    for (auto _ : state) benchmark::DoNotOptimize(iaa::pairwise_agreements(masks));
}
BENCHMARK(BM_PairwiseFiveMasks);

void BM_Fosd(benchmark::State& state) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> a(static_cast<std::size_t>(state.range(0))), b(a.size());
    for (auto& x : a) x = u(rng);
    for (auto& x : b) x = u(rng);
    const iaa::stats::Sample sa(a), sb(b);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            iaa::stats::fosd_test(sa, sb, iaa::stats::FosdHypothesis::ADominatesB, {1000, 1, 1}));
    }
}
BENCHMARK(BM_Fosd)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_NetworkForward(benchmark::State& state) {
    iaa::learn::Network net(iaa::learn::NetworkConfig{}, 1);
    iaa::learn::Tensor batch(32, 1, 32, 32);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& v : batch.data) v = u(rng);
    for (auto _ : state) benchmark::DoNotOptimize(net.forward(batch, iaa::learn::ForwardOptions::eval()));
}
BENCHMARK(BM_NetworkForward)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
