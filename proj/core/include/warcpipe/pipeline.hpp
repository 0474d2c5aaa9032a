#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "warcpipe/byte_source.hpp"
#include "warcpipe/corpus.hpp"
#include "warcpipe/dedup.hpp"
#include "warcpipe/extract.hpp"
#include "warcpipe/langid.hpp"
#include "warcpipe/warc.hpp"

namespace warcpipe {

struct ManifestEntry {
    WarcSegmentRef ref;
    std::string location;  // local path or remote URL the segment is read from

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

// Segments in canonical processing order. Every dedup tie-break follows it.
struct JobManifest {
    std::vector<ManifestEntry> segments;
    std::uint64_t shuffle_seed = 0;
    std::string created_at;  // ISO 8601, UTC
};

// Seeded Fisher-Yates permutation drawn from mt19937_64 with rejection
// sampling, so the order is the same on every platform. Throws
// ValidationError on duplicate segments.
JobManifest shuffle_manifest(std::vector<ManifestEntry> segments, std::uint64_t seed);

// Shuffles, then keeps the first `limit` segments (all when limit is 0).
JobManifest sample_manifest(std::vector<ManifestEntry> segments, std::uint64_t seed, std::size_t limit);

// Parses a warc.paths listing. Lines of other crawls are skipped when
// `crawl` is non-empty. With `root`, locations point into a local mirror of
// the bucket layout; otherwise they are the canonical s3:// URLs.
std::vector<ManifestEntry> parse_paths_listing(std::string_view text, std::string_view crawl,
                                               const std::optional<std::filesystem::path>& root = std::nullopt);

// Reads a listing from a local or remote location; gzip input is detected by
// its magic bytes.
std::string read_listing(const std::string& location, const RetryPolicy& retry = {});

void save_manifest(const JobManifest& manifest, const std::filesystem::path& path);
JobManifest load_manifest(const std::filesystem::path& path);  // throws ConfigError

std::string utc_timestamp();

enum class RecordGranularity { document, paragraph };

// Key-value configuration, one "key = value" per line, '#' comments:
//   lang_target, min_conf, min_chars, lang_model_dir, external_detector,
//   min_words, min_alpha_ratio, max_replacement_ratio,
//   shingle_size, num_perms, bands, rows, jaccard_threshold,
//   chunk_bytes, worker_count, url_rules (repeatable), id_seed ("random" or
//   an integer), lsh_seed, record_granularity (document|paragraph),
//   fetch_attempts, fetch_backoff_ms.
// Relative paths are resolved against the directory of the config file.
struct PipelineConfig {
    LangIdConfig lang;
    std::filesystem::path lang_model_dir;
    std::string external_detector;
    CleaningPolicy cleaning;
    double max_replacement_ratio = 0.05;
    LshParams lsh;
    std::uint64_t chunk_bytes = kDefaultChunkBytes;
    std::size_t worker_count = 1;
    std::vector<std::filesystem::path> url_rules;
    std::optional<std::uint64_t> id_seed = 0;  // nullopt: random identifiers
    std::uint64_t lsh_seed = 0x5eed;
    RecordGranularity granularity = RecordGranularity::document;
    RetryPolicy retry;

    // Throws ConfigError for inconsistent values or missing files.
    void validate() const;
};

PipelineConfig default_config();
PipelineConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

// Record counts after each extraction step, in stage order.
struct ExtractCounters {
    std::uint64_t fetched = 0;         // WARC records framed
    std::uint64_t responses = 0;       // HTML responses with status 200 allowed by the URL rules
    std::uint64_t decoded = 0;         // decoded under the replacement ceiling
    std::uint64_t lang_accepted = 0;   // accepted by the language cascade
    std::uint64_t extracted = 0;       // at least one paragraph after cleaning; one shard record each
    std::uint64_t skipped_corrupt = 0; // damaged regions in the input
    std::uint64_t url_denied = 0;

    ExtractCounters& operator+=(const ExtractCounters& o);
    friend bool operator==(const ExtractCounters&, const ExtractCounters&) = default;
};

struct DedupCounters {
    std::uint64_t input = 0;              // shard records read
    std::uint64_t malformed_lines = 0;
    std::uint64_t exact_doc_removed = 0;
    std::uint64_t exact_para_removed = 0; // paragraphs cut
    std::uint64_t emptied_doc_removed = 0;
    std::uint64_t lsh_removed = 0;
    std::uint64_t candidate_pairs = 0;
    std::uint64_t written = 0;            // surviving documents
    std::uint64_t records_written = 0;    // output lines (differs in paragraph granularity)

    friend bool operator==(const DedupCounters&, const DedupCounters&) = default;
};

enum class SegmentStatus { done, failed, skipped };
std::string_view to_string(SegmentStatus s);

struct SegmentReport {
    std::string url_warc;
    SegmentStatus status = SegmentStatus::skipped;
    std::string error;
    ExtractCounters counters;
    double seconds = 0;
};

struct RunReport {
    std::vector<SegmentReport> segments;
    ExtractCounters extract;
    std::optional<DedupCounters> dedup;
    std::map<std::string, double> phase_seconds;

    // (stage name, surviving records) in stage order.
    std::vector<std::pair<std::string, std::uint64_t>> stage_counts() const;
    bool monotone() const;
    // written == extracted - exact-doc - emptied-doc - LSH removals, with the
    // dedup input equal to the extracted count.
    bool conserved() const;
    std::size_t failed_segments() const;

    std::string to_json() const;
    static RunReport from_json(std::string_view text);
};

void save_report(const RunReport& report, const std::filesystem::path& path);
RunReport load_report(const std::filesystem::path& path);

struct ExtractOptions {
    // Set from a signal handler to stop between records. Finished shards stay
    // valid; the interrupted segment leaves nothing behind.
    const std::atomic<bool>* stop = nullptr;
    // Skip segments whose shard and done marker already exist.
    bool resume = true;
};

// Per segment: fetch, gunzip, frame WARC records, decode, extract paragraphs,
// language gate, clean, store. Writes <out>/shards/shard-<index>.jsonl with a
// .done marker beside it and <out>/extract_report.json.
RunReport run_extract(const JobManifest& manifest, const PipelineConfig& config, const std::filesystem::path& out,
                      const ExtractOptions& options = {});

// Reads shards (or earlier chunks) of `in` in name order, applies exact
// document, exact paragraph and LSH near-duplicate removal in that order and
// writes <out>/chunk-*.jsonl, <out>/clusters.jsonl and <out>/dedup_report.json.
RunReport run_dedup(const std::filesystem::path& in, const PipelineConfig& config, const std::filesystem::path& out);

struct FilterCounters {
    std::uint64_t input = 0;
    std::uint64_t kept = 0;
    std::uint64_t malformed_lines = 0;
};

FilterCounters filter_corpus(const std::filesystem::path& in, const UrlRules& rules, const std::filesystem::path& out,
                             std::uint64_t chunk_bytes);

}  // namespace warcpipe
