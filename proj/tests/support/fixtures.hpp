#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "warcpipe/corpus.hpp"
#include "warcpipe/extract.hpp"
#include "warcpipe/pipeline.hpp"

namespace fixtures {

// ---- WARC writing -------------------------------------------------------

// One gzip member (RFC 1952) holding `data`.
std::string gzip_member(std::string_view data, int level = 6);

std::string http_response(int status, std::string_view content_type, std::string_view body);

// A WARC/1.0 record with CRLF header block and the CRLFCRLF terminator.
std::string warc_record(std::string_view type, std::string_view target_uri, std::string_view block,
                        std::uint64_t serial = 0);

// Each record compressed as its own member, as Common Crawl does.
std::string warc_gz(const std::vector<std::string>& records);

void write_file(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

// ---- Independent reference reader ---------------------------------------

struct ReferenceRecord {
    std::string type;
    std::string uri;
    std::string block;
};

// gzread over the whole file, then naive Content-Length splitting.
std::vector<ReferenceRecord> reference_read(const std::filesystem::path& warc_gz_path);

// ---- Golden segment -----------------------------------------------------

inline const char* kGoldenCrawl = "CC-MAIN-2019-04";
inline const char* kGoldenSegment = "1547583730728.68";

// 12 pages (6 Spanish, 4 English, 2 boilerplate-only) plus a warcinfo record,
// two requests, a metadata record, a 404 page and a PNG response.
struct GoldenSegment {
    std::string bytes;
    std::vector<std::string> spanish_urls;
    // Hand-enumerated expectations.
    std::uint64_t records = 18;
    std::uint64_t responses = 12;
    std::uint64_t decoded = 12;
    std::uint64_t lang_accepted = 6;
    std::uint64_t extracted = 6;
};

GoldenSegment golden_segment();
std::string golden_file_name(int part = 91);

// Pages of one segment file, by language; `variant` makes pages distinct
// between segments while `shared` repeats a fixed set across segments.
std::string spanish_page(int variant);
std::string english_page(int variant);
std::string boilerplate_page(int variant);

// Two Spanish pages, an English page and a boilerplate page under a host
// unique to `k`.
std::string mixed_segment(int k);

// Streams a segment of at least `min_bytes` compressed bytes to `path`: pages of
// Spanish word salad drawn from the training vocabulary, some English pages,
// boilerplate pages and one very large Spanish page of `large_page_bytes`.
// Returns the number of response records written.
std::size_t write_large_segment(const std::filesystem::path& path, std::uint64_t min_bytes, std::uint64_t seed,
                                std::size_t large_page_bytes = 0);

// Writes segment files into a bucket-layout mirror under `root` and returns
// manifest entries pointing at them (canonical order = vector order).
struct MirrorSegment {
    std::string file_name;
    std::string bytes;
};
std::vector<warcpipe::ManifestEntry> write_mirror(const std::filesystem::path& root,
                                                  const std::vector<MirrorSegment>& segments,
                                                  const std::string& crawl = kGoldenCrawl,
                                                  const std::string& segment_id = kGoldenSegment);

// ---- Synthetic documents -----------------------------------------------

// Words made of random letters; `rng` decides everything.
std::string random_word(std::mt19937_64& rng);
std::vector<std::string> random_words(std::mt19937_64& rng, std::size_t n);
std::string join(const std::vector<std::string>& words, std::string_view sep = " ");

warcpipe::Document make_doc(std::string id, std::vector<std::string> paragraphs,
                            std::string url = "http://example.org/");

// ---- Brute-force oracles ------------------------------------------------

// First occurrence of each normalised full text wins; O(n^2) comparisons.
std::vector<std::size_t> oracle_exact_documents(const std::vector<warcpipe::Document>& docs);
// Global first-occurrence scan over normalised paragraphs.
std::vector<warcpipe::Document> oracle_exact_paragraphs(const std::vector<warcpipe::Document>& docs);

// Whole-text ICU pipeline: NFKC, root lowercase, strip P/S/Nd, NFKC again,
// collapse Unicode whitespace.
std::string oracle_normalize(std::string_view text);

// Shingles by direct enumeration of word windows (std::set based).
std::vector<std::string> oracle_shingles(std::string_view normalized, std::size_t w);
double oracle_jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b);

// Counts from the stated rules with std::regex, one pass per record.
warcpipe::CorpusStats oracle_stats(const std::vector<std::string>& texts);

// Paths to shipped data.
std::filesystem::path source_dir();
std::filesystem::path model_dir();

// Fresh directory under the system temp dir.
std::filesystem::path temp_dir(std::string_view tag);

warcpipe::PipelineConfig test_config();

}  // namespace fixtures
