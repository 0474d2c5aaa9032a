#include <benchmark/benchmark.h>

#include "bench_text.hpp"
#include "warcpipe/encoding.hpp"
#include "warcpipe/extract.hpp"

using namespace warcpipe;

static void BM_DecodeUtf8(benchmark::State& state) {
    std::string page = bench::html_page(40, 60);
    CharsetHints hints;
    hints.http_header = "utf-8";
    for (auto _ : state) benchmark::DoNotOptimize(decode_to_utf8(page, hints));
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * page.size()));
}
BENCHMARK(BM_DecodeUtf8);

static void BM_DecodeSniffed(benchmark::State& state) {
    std::string page = bench::html_page(40, 60);
    for (auto _ : state) benchmark::DoNotOptimize(decode_to_utf8(page, {}));
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * page.size()));
}
BENCHMARK(BM_DecodeSniffed);

static void BM_ExtractParagraphs(benchmark::State& state) {
    std::string page = bench::html_page(static_cast<std::size_t>(state.range(0)), 60);
    for (auto _ : state) benchmark::DoNotOptimize(extract_paragraphs(page));
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * page.size()));
}
BENCHMARK(BM_ExtractParagraphs)->Arg(10)->Arg(200);

static void BM_CleanDocument(benchmark::State& state) {
    Document doc;
    doc.paragraphs = extract_paragraphs(bench::html_page(40, 60));
    for (auto _ : state) benchmark::DoNotOptimize(clean_document(doc));
}
BENCHMARK(BM_CleanDocument);
