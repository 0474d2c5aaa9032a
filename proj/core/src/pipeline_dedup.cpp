#include <chrono>
#include <fstream>
#include <unordered_map>

#include "json.hpp"
#include "warcpipe/errors.hpp"
#include "warcpipe/parallel.hpp"
#include "warcpipe/pipeline.hpp"

namespace warcpipe {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kSignatureBatch = 2048;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_clusters(const fs::path& path, const std::vector<DuplicateCluster>& clusters) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& c : clusters) {
        nlohmann::ordered_json j;
        j["kept_id"] = c.kept_id;
        j["removed_ids"] = c.removed_ids;
        j["similarities"] = c.similarities;
        out << j.dump() << '\n';
    }
    if (!out) throw IoError("write failed on " + path.string());
}

// Computes signatures for a batch of surviving documents in parallel.
class SignatureBatcher {
  public:
    SignatureBatcher(const LshParams& params, std::uint64_t seed, std::size_t workers,
                     std::vector<std::optional<MinHashSignature>>& out)
        : params_(params), hasher_(params.num_perms, seed), workers_(workers), out_(out) {}

    void add(std::string text) {
        texts_.push_back(std::move(text));
        if (texts_.size() >= kSignatureBatch) flush();
    }

    void flush() {
        std::size_t base = out_.size();
        out_.resize(base + texts_.size());
        parallel_for(texts_.size(), workers_, [&](std::size_t i) {
            HashedShingles s = hash_shingles(normalize_for_dedup(texts_[i]), params_.shingle_size, hasher_.seed());
            if (!s.empty()) out_[base + i] = hasher_.signature(s);
        });
        texts_.clear();
    }

  private:
    const LshParams& params_;
    MinHasher hasher_;
    std::size_t workers_;
    std::vector<std::optional<MinHashSignature>>& out_;
    std::vector<std::string> texts_;
};

void for_each_staged(const fs::path& stage, const std::function<void(std::uint32_t, CorpusRecord&&)>& fn) {
    std::uint32_t index = 0;
    for_each_record(stage, [&](CorpusRecord&& r) { fn(index++, std::move(r)); });
}

}  // namespace

RunReport run_dedup(const fs::path& in, const PipelineConfig& config, const fs::path& out) {
    config.lsh.validate();
    if (config.chunk_bytes < kMinChunkBytes) throw ConfigError("chunk_bytes must be at least 1 MB");
    std::error_code ec;
    if (fs::exists(out) && fs::equivalent(in, out, ec)) throw ConfigError("dedup output must differ from its input");
    fs::create_directories(out, ec);
    if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());

    RunReport report;
    if (fs::exists(in / "extract_report.json")) {
        RunReport extraction = load_report(in / "extract_report.json");
        report.segments = std::move(extraction.segments);
        report.extract = extraction.extract;
        report.phase_seconds = std::move(extraction.phase_seconds);
    }

    fs::path shard_dir = fs::is_directory(in / "shards") ? in / "shards" : in;
    std::vector<fs::path> inputs = list_jsonl(shard_dir);
    DedupCounters counters;

    // Pass 1: exact document and paragraph filters in canonical order; the
    // survivors go to a staging file and get a MinHash signature each.
    auto t0 = std::chrono::steady_clock::now();
    const fs::path stage = out / ".dedup-stage.jsonl";
    std::vector<std::optional<MinHashSignature>> signatures;
    std::vector<std::string> ids;
    {
        ExactDocumentDeduper doc_dedup;
        ExactParagraphDeduper para_dedup;
        SignatureBatcher batcher(config.lsh, config.lsh_seed, config.worker_count, signatures);
        std::ofstream staged(stage, std::ios::binary | std::ios::trunc);
        if (!staged) throw IoError("cannot open " + stage.string());
        for (const auto& file : inputs) {
            ReadCounters rc;
            for_each_record(
                file,
                [&](CorpusRecord&& rec) {
                    ++counters.input;
                    Document doc = to_document(rec);
                    if (!doc_dedup.admit(doc)) return;
                    auto kept = para_dedup.filter(std::move(doc));
                    if (!kept) return;
                    rec.text = kept->joined_text('\n');
                    staged << to_json_line(rec) << '\n';
                    ids.push_back(rec.id);
                    batcher.add(std::move(rec.text));
                },
                &rc);
            counters.malformed_lines += rc.malformed;
        }
        batcher.flush();
        staged.close();
        if (!staged) throw IoError("write failed on " + stage.string());
        counters.exact_doc_removed = doc_dedup.removed();
        counters.exact_para_removed = para_dedup.paragraphs_removed();
        counters.emptied_doc_removed = para_dedup.documents_emptied();
    }
    report.phase_seconds["dedup_exact"] = seconds_since(t0);

    // Pass 2: LSH candidates, then exact Jaccard verification with shingle sets
    // rebuilt only for documents that appear in a candidate pair.
    t0 = std::chrono::steady_clock::now();
    auto pairs = lsh_candidates(signatures, config.lsh, config.worker_count);
    counters.candidate_pairs = pairs.size();
    signatures.clear();
    signatures.shrink_to_fit();

    std::vector<char> involved(ids.size(), 0);
    for (auto [a, b] : pairs) involved[a] = involved[b] = 1;
    std::unordered_map<std::uint32_t, HashedShingles> shingles;
    if (!pairs.empty()) {
        for_each_staged(stage, [&](std::uint32_t i, CorpusRecord&& rec) {
            if (involved[i])
                shingles.emplace(i, hash_shingles(normalize_for_dedup(rec.text), config.lsh.shingle_size, config.lsh_seed));
        });
    }
    NearDuplicatePlan plan = resolve_candidates(ids.size(), pairs, config.lsh.jaccard_threshold,
                                                [&](std::uint32_t i) -> const HashedShingles& { return shingles.at(i); });
    shingles.clear();
    counters.lsh_removed = plan.removed();
    write_clusters(out / "clusters.jsonl", clusters_from_plan(plan, [&](std::uint32_t i) { return ids[i]; }));
    report.phase_seconds["dedup_lsh"] = seconds_since(t0);

    // Pass 3: stream the survivors into the final chunks.
    t0 = std::chrono::steady_clock::now();
    {
        ChunkWriter writer(out, config.chunk_bytes);
        std::unique_ptr<IdSource> id_source;
        if (config.id_seed)
            id_source = std::make_unique<DerivedIdSource>(*config.id_seed);
        else
            id_source = std::make_unique<RandomIdSource>();
        for_each_staged(stage, [&](std::uint32_t i, CorpusRecord&& rec) {
            if (plan.absorbed_by[i]) return;
            ++counters.written;
            if (config.granularity == RecordGranularity::document) {
                writer.write(rec);
                ++counters.records_written;
                return;
            }
            for (const auto& r : make_paragraph_records(to_document(rec), *id_source)) {
                writer.write(r);
                ++counters.records_written;
            }
        });
        writer.finish();
    }
    fs::remove(stage);
    report.phase_seconds["dedup_write"] = seconds_since(t0);

    if (!fs::exists(in / "extract_report.json")) {
        // Input without an extraction report counts as already extracted.
        auto& e = report.extract;
        e.fetched = e.responses = e.decoded = e.lang_accepted = e.extracted = counters.input;
    }
    report.dedup = counters;
    save_report(report, out / "dedup_report.json");
    return report;
}

FilterCounters filter_corpus(const fs::path& in, const UrlRules& rules, const fs::path& out, std::uint64_t chunk_bytes) {
    FilterCounters counters;
    ChunkWriter writer(out, chunk_bytes);
    fs::path dir = fs::is_directory(in / "shards") ? in / "shards" : in;
    for (const auto& file : list_jsonl(dir)) {
        ReadCounters rc;
        for_each_record(
            file,
            [&](CorpusRecord&& rec) {
                ++counters.input;
                if (!rules.keep(rec.url)) return;
                ++counters.kept;
                writer.write(rec);
            },
            &rc);
        counters.malformed_lines += rc.malformed;
    }
    writer.finish();
    return counters;
}

}  // namespace warcpipe
