#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "warcpipe/extract.hpp"

namespace warcpipe {

// RFC 4122 UUID. Only version 4 values are produced.
class Uuid {
  public:
    Uuid() = default;
    explicit Uuid(std::array<std::uint8_t, 16> bytes) : bytes_(bytes) {}

    // Forces the version nibble to 4 and the variant bits to 10xx.
    static Uuid v4_from_bits(std::uint64_t high, std::uint64_t low);
    static Uuid parse(std::string_view text);  // throws ValidationError

    std::string to_string() const;  // 8-4-4-4-12 lower-case hex
    int version() const { return bytes_[6] >> 4; }
    bool rfc_variant() const { return (bytes_[8] & 0xC0) == 0x80; }

    friend bool operator==(const Uuid&, const Uuid&) = default;

  private:
    std::array<std::uint8_t, 16> bytes_{};
};

bool is_uuid_v4(std::string_view text);

class IdSource {
  public:
    virtual ~IdSource() = default;
    // `ordinal` distinguishes several records cut from one document.
    virtual std::string next_id(const Document& doc, std::uint64_t ordinal) = 0;
};

// Fresh random v4 identifiers.
class RandomIdSource final : public IdSource {
  public:
    RandomIdSource();
    std::string next_id(const Document& doc, std::uint64_t ordinal) override;

  private:
    std::mt19937_64 rng_;
};

// v4-shaped identifiers derived from (seed, id, url_warc, url, ordinal), so the
// same input produces the same corpus in any worker layout or on resume.
class DerivedIdSource final : public IdSource {
  public:
    explicit DerivedIdSource(std::uint64_t seed) : seed_(seed) {}
    std::string next_id(const Document& doc, std::uint64_t ordinal) override;

  private:
    std::uint64_t seed_;
};

struct CorpusRecord {
    std::string id;
    std::string text;
    std::string url_warc;
    std::string url;

    friend bool operator==(const CorpusRecord&, const CorpusRecord&) = default;
};

// Throws ValidationError when a record breaks the output invariants.
void validate(const CorpusRecord& rec);

// Paragraphs joined by '\n'. Throws std::invalid_argument for an empty document.
CorpusRecord make_record(const Document& doc, IdSource& ids, std::uint64_t ordinal = 0);

// One record per paragraph, each with its own identifier; paragraph i uses
// ordinal base_ordinal + i.
std::vector<CorpusRecord> make_paragraph_records(const Document& doc, IdSource& ids, std::uint64_t base_ordinal = 0);

// Field order id, text, url_warc, url; non-ASCII emitted as raw UTF-8; no
// trailing newline.
std::string to_json_line(const CorpusRecord& rec);
// Throws ValidationError on malformed JSON or missing/mistyped fields.
CorpusRecord from_json_line(std::string_view line);

// Splits record text back into a document (paragraph per line).
Document to_document(const CorpusRecord& rec);

inline constexpr std::uint64_t kMinChunkBytes = 1ull << 20;
inline constexpr std::uint64_t kDefaultChunkBytes = 10ull << 30;

// Writes JSONL chunks named chunk-00000.jsonl, chunk-00001.jsonl, ... A chunk
// is closed before a record that would push it past chunk_bytes. Completed
// chunks are listed in chunks.manifest.json after every close so an aborted run
// can tell finished chunks from a partial one.
class ChunkWriter {
  public:
    ChunkWriter(std::filesystem::path dir, std::uint64_t chunk_bytes, std::string prefix = "chunk-");
    ~ChunkWriter();
    ChunkWriter(const ChunkWriter&) = delete;
    ChunkWriter& operator=(const ChunkWriter&) = delete;

    void write(const CorpusRecord& rec);
    void write_line(std::string_view json_line);
    // Closes the open chunk and marks the manifest complete.
    std::vector<std::filesystem::path> finish();

    std::uint64_t records_written() const { return records_; }

  private:
    void open_next();
    void close_current();
    void write_manifest(bool complete);

    std::filesystem::path dir_;
    std::uint64_t chunk_bytes_;
    std::string prefix_;
    std::ofstream out_;
    std::uint64_t current_bytes_ = 0;
    std::uint64_t current_records_ = 0;
    std::uint64_t records_ = 0;
    std::vector<std::filesystem::path> done_;
    std::vector<std::uint64_t> done_records_;
    bool finished_ = false;
};

std::vector<std::filesystem::path> write_chunks(const std::vector<CorpusRecord>& records,
                                                const std::filesystem::path& dir, std::uint64_t chunk_bytes);

// *.jsonl files of a directory whose names start with one of `prefixes`,
// sorted by name.
std::vector<std::filesystem::path> list_jsonl(const std::filesystem::path& dir,
                                              std::initializer_list<std::string_view> prefixes = {"chunk-", "shard-"});

struct ReadCounters {
    std::uint64_t lines = 0;
    std::uint64_t malformed = 0;
};

// Streams records in file order; malformed lines are counted and skipped.
void for_each_record(const std::filesystem::path& file, const std::function<void(CorpusRecord&&)>& fn,
                     ReadCounters* counters = nullptr);

std::vector<CorpusRecord> read_records(const std::vector<std::filesystem::path>& files,
                                       ReadCounters* counters = nullptr);

// Host-suffix patterns ("example.com" matches example.com and a.example.com)
// or URL prefixes (anything containing "://").
class UrlRules {
  public:
    void deny(std::string pattern);   // throws ConfigError if malformed
    void allow(std::string pattern);  // throws ConfigError if malformed

    // Lines "deny <pattern>", "allow <pattern>" or a bare pattern (deny);
    // '#' starts a comment.
    static UrlRules from_file(const std::filesystem::path& path);
    static UrlRules parse(std::string_view text);

    // Deny wins; a non-empty allow list keeps only matches.
    bool keep(std::string_view url) const;
    bool empty() const { return allow_.empty() && deny_.empty(); }

  private:
    struct Pattern {
        bool prefix = false;
        std::string value;
    };
    static Pattern compile(std::string pattern);
    static bool matches(const Pattern& p, std::string_view url, std::string_view host);

    std::vector<Pattern> allow_;
    std::vector<Pattern> deny_;
};

// Lower-cased host of an absolute URL, without userinfo or port.
std::string url_host(std::string_view url);

std::vector<CorpusRecord> filter_by_url(std::vector<CorpusRecord> records, const UrlRules& rules);

struct CorpusStats {
    std::uint64_t bytes = 0;
    std::uint64_t documents = 0;
    std::uint64_t paragraphs = 0;
    std::uint64_t words = 0;
    std::uint64_t sentences = 0;
    std::uint64_t lines = 0;
    std::uint64_t malformed_lines = 0;

    CorpusStats& operator+=(const CorpusStats& o);
    friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

// Counts for one record's text: words are whitespace-separated tokens,
// paragraphs are '\n'-separated segments, sentences are runs of . ? ! or the
// ellipsis character followed by whitespace or end of paragraph.
CorpusStats text_stats(std::string_view text);

// Parallel map over the chunk files with an associative merge.
CorpusStats compute_stats(const std::vector<std::filesystem::path>& chunks, std::size_t workers = 1);

std::string stats_to_json(const CorpusStats& s);
std::string stats_to_table(const CorpusStats& s);

}  // namespace warcpipe
