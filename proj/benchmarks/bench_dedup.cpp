#include <benchmark/benchmark.h>

#include <optional>

#include "bench_text.hpp"
#include "warcpipe/dedup.hpp"
#include "warcpipe/hash.hpp"

using namespace warcpipe;

static void BM_Murmur3_128(benchmark::State& state) {
    std::string data(static_cast<std::size_t>(state.range(0)), 'x');
    for (auto _ : state) benchmark::DoNotOptimize(murmur3_128(data, 7));
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_Murmur3_128)->Arg(32)->Arg(4096);

static void BM_NormalizeForDedup(benchmark::State& state) {
    std::string text = bench::spanish_text(500);
    for (auto _ : state) benchmark::DoNotOptimize(normalize_for_dedup(text));
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_NormalizeForDedup);

static void BM_Shingle(benchmark::State& state) {
    std::string text = normalize_for_dedup(bench::spanish_text(static_cast<std::size_t>(state.range(0))));
    for (auto _ : state) benchmark::DoNotOptimize(shingle(text, 5));
}
BENCHMARK(BM_Shingle)->Arg(200)->Arg(2000);

static void BM_HashShingles(benchmark::State& state) {
    std::string text = normalize_for_dedup(bench::spanish_text(static_cast<std::size_t>(state.range(0))));
    for (auto _ : state) benchmark::DoNotOptimize(hash_shingles(text, 5, 0x5eed));
}
BENCHMARK(BM_HashShingles)->Arg(200)->Arg(2000);

static void BM_MinHashSignature(benchmark::State& state) {
    ShingleSet s = shingle(normalize_for_dedup(bench::spanish_text(static_cast<std::size_t>(state.range(0)))), 5);
    MinHasher hasher(128, 0x5eed);
    for (auto _ : state) benchmark::DoNotOptimize(hasher.signature(s));
    state.counters["shingles"] = static_cast<double>(s.size());
}
BENCHMARK(BM_MinHashSignature)->Arg(200)->Arg(2000);

static void BM_LshCandidates(benchmark::State& state) {
    LshParams params;
    MinHasher hasher(params.num_perms, 1);
    std::vector<std::optional<MinHashSignature>> sigs;
    for (std::int64_t i = 0; i < state.range(0); ++i)
        sigs.push_back(hasher.signature(shingle(normalize_for_dedup(bench::spanish_text(100, static_cast<std::uint64_t>(i))), 5)));
    for (auto _ : state) benchmark::DoNotOptimize(lsh_candidates(sigs, params, 1));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_LshCandidates)->Arg(10000);
