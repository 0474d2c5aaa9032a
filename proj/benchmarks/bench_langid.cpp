#include <benchmark/benchmark.h>

#include "bench_text.hpp"
#include "warcpipe/langid.hpp"

using namespace warcpipe;

namespace {

const std::filesystem::path kModels = std::filesystem::path(WARCPIPE_SOURCE_DIR) / "models";

}  // namespace

static void BM_Stage1(benchmark::State& state) {
    RankProfileDetector d = RankProfileDetector::from_dir(kModels / "stage1");
    std::string text = bench::spanish_text(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(d.detect(text));
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_Stage1)->Arg(12)->Arg(600);

static void BM_Stage2(benchmark::State& state) {
    NaiveBayesDetector d = NaiveBayesDetector::from_dir(kModels / "stage2");
    std::string text = bench::spanish_text(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(d.detect(text));
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_Stage2)->Arg(12)->Arg(600);

static void BM_Cascade(benchmark::State& state) {
    LanguageCascade c = load_cascade(kModels, LangIdConfig{});
    std::string text = bench::spanish_text(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(c.accept(text));
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_Cascade)->Arg(600);
