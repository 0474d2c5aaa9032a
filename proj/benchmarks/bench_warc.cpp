#include <benchmark/benchmark.h>
#include <zlib.h>

#include <stdexcept>

#include "bench_text.hpp"
#include "warcpipe/byte_source.hpp"
#include "warcpipe/warc.hpp"

using namespace warcpipe;

namespace {

std::string gzip(std::string_view data) {
    z_stream z{};
    if (deflateInit2(&z, 6, Z_DEFLATED, 16 + MAX_WBITS, 8, Z_DEFAULT_STRATEGY) != Z_OK) throw std::runtime_error("deflateInit2");
    std::string out(deflateBound(&z, static_cast<uLong>(data.size())), '\0');
    z.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    z.avail_in = static_cast<uInt>(data.size());
    z.next_out = reinterpret_cast<Bytef*>(out.data());
    z.avail_out = static_cast<uInt>(out.size());
    deflate(&z, Z_FINISH);
    out.resize(z.total_out);
    deflateEnd(&z);
    return out;
}

// One gzip member per record, as in Common Crawl segments.
std::string segment(std::size_t pages) {
    std::string out;
    for (std::size_t i = 0; i < pages; ++i) {
        std::string html = bench::html_page(20, 50, i);
        std::string http = "HTTP/1.1 200 OK\r\nContent-Type: text/html; charset=utf-8\r\nContent-Length: " +
                           std::to_string(html.size()) + "\r\n\r\n" + html;
        std::string uri = "http://example.es/" + std::to_string(i);
        for (const char* type : {"request", "response"}) {
            std::string block = std::string_view(type) == "response" ? http : "GET / HTTP/1.1\r\n\r\n";
            std::string rec = "WARC/1.0\r\nWARC-Type: " + std::string(type) + "\r\nWARC-Target-URI: " + uri +
                              "\r\nWARC-Record-ID: <urn:uuid:" + std::to_string(i) +
                              ">\r\nContent-Type: application/http\r\nContent-Length: " + std::to_string(block.size()) +
                              "\r\n\r\n" + block + "\r\n\r\n";
            out += gzip(rec);
        }
    }
    return out;
}

}  // namespace

static void BM_WarcStreamResponses(benchmark::State& state) {
    const std::string seg = segment(static_cast<std::size_t>(state.range(0)));
    std::size_t records = 0;
    for (auto _ : state) {
        MemorySource src(seg);
        WarcRecordStream stream(src, std::set<RecordType>{RecordType::response});
        while (auto r = stream.next()) ++records;
    }
    benchmark::DoNotOptimize(records);
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * seg.size()));
}
BENCHMARK(BM_WarcStreamResponses)->Arg(200);
