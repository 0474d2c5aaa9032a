#include <chrono>
#include <fstream>
#include <mutex>

#include "json.hpp"
#include "warcpipe/encoding.hpp"
#include "warcpipe/errors.hpp"
#include "warcpipe/parallel.hpp"
#include "warcpipe/pipeline.hpp"

namespace warcpipe {

namespace fs = std::filesystem;

namespace {

struct ExtractContext {
    const PipelineConfig& config;
    const LanguageCascade& cascade;
    const UrlRules& rules;
    fs::path shard_dir;
    const std::atomic<bool>* stop;
};

class Interrupted : public std::exception {};

std::string shard_stem(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "shard-%06zu", index);
    return buf;
}

bool is_html(const RawWarcRecord& rec) {
    if (!rec.content_type) return false;
    std::string ct = *rec.content_type;
    for (auto& c : ct) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ct.find("text/html") != std::string::npos || ct.find("application/xhtml") != std::string::npos;
}

UrlRules load_rules(const std::vector<fs::path>& files) {
    std::string combined;
    for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        if (!in) throw ConfigError("cannot read URL rules file " + f.string());
        combined.append(std::istreambuf_iterator<char>(in), {});
        combined.push_back('\n');
    }
    return UrlRules::parse(combined);
}

std::unique_ptr<IdSource> make_id_source(const PipelineConfig& config) {
    if (config.id_seed) return std::make_unique<DerivedIdSource>(*config.id_seed);
    return std::make_unique<RandomIdSource>();
}

void write_done_marker(const fs::path& path, const std::string& url_warc, const ExtractCounters& c) {
    nlohmann::ordered_json j;
    j["url_warc"] = url_warc;
    j["fetched"] = c.fetched;
    j["responses"] = c.responses;
    j["decoded"] = c.decoded;
    j["lang_accepted"] = c.lang_accepted;
    j["extracted"] = c.extracted;
    j["skipped_corrupt"] = c.skipped_corrupt;
    j["url_denied"] = c.url_denied;
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << j.dump() << '\n';
        if (!out) throw IoError("cannot write " + path.string());
    }
    fs::rename(tmp, path);
}

std::optional<ExtractCounters> read_done_marker(const fs::path& path, const std::string& url_warc) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    try {
        auto j = nlohmann::json::parse(in);
        if (j.at("url_warc").get<std::string>() != url_warc) return std::nullopt;
        ExtractCounters c;
        c.fetched = j.at("fetched").get<std::uint64_t>();
        c.responses = j.at("responses").get<std::uint64_t>();
        c.decoded = j.at("decoded").get<std::uint64_t>();
        c.lang_accepted = j.at("lang_accepted").get<std::uint64_t>();
        c.extracted = j.at("extracted").get<std::uint64_t>();
        c.skipped_corrupt = j.at("skipped_corrupt").get<std::uint64_t>();
        c.url_denied = j.at("url_denied").get<std::uint64_t>();
        return c;
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
}

ExtractCounters process_segment(const ManifestEntry& entry, std::size_t index, const ExtractContext& ctx) {
    const std::string url_warc = canonical_warc_url(entry.ref);
    const fs::path shard = ctx.shard_dir / (shard_stem(index) + ".jsonl");
    fs::path tmp = shard;
    tmp += ".tmp";
    auto ids = make_id_source(ctx.config);
    ExtractCounters c;

    auto source = open_source(entry.location, ctx.config.retry);
    WarcRecordStream stream(*source, std::set<RecordType>{RecordType::response});
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string());

    while (auto rec = stream.next()) {
        if (ctx.stop && ctx.stop->load(std::memory_order_relaxed)) throw Interrupted();
        if (rec->http_status != 200 || !is_html(*rec)) continue;
        if (!ctx.rules.keep(rec->target_uri)) {
            ++c.url_denied;
            continue;
        }
        ++c.responses;

        std::string_view body = rec->http_body();
        CharsetHints hints;
        hints.http_header = charset_from_content_type(*rec->content_type);
        hints.meta_tag = sniff_meta_charset(body);
        DecodedText decoded = decode_to_utf8(body, hints);
        if (!decoded.acceptable(ctx.config.max_replacement_ratio)) continue;
        ++c.decoded;

        Document doc;
        doc.url = rec->target_uri;
        doc.warc_url = url_warc;
        doc.encoding_used = decoded.encoding_used;
        doc.paragraphs = extract_paragraphs(decoded.text);
        if (!ctx.cascade.accept(doc.joined_text('\n'))) continue;
        ++c.lang_accepted;

        auto cleaned = clean_document(std::move(doc), ctx.config.cleaning);
        if (!cleaned) continue;
        ++c.extracted;
        // The framed-record count is a stable position for the id.
        CorpusRecord record = make_record(*cleaned, *ids, stream.counters().boundaries);
        out << to_json_line(record) << '\n';
        if (!out) throw IoError("write failed on " + tmp.string());
    }
    const StreamCounters& sc = stream.counters();
    c.fetched = sc.yielded + sc.filtered_out;
    c.skipped_corrupt = sc.skipped_corrupt;

    out.close();
    if (!out) throw IoError("write failed on " + tmp.string());
    fs::rename(tmp, shard);
    write_done_marker(ctx.shard_dir / (shard_stem(index) + ".done"), url_warc, c);
    return c;
}

}  // namespace

RunReport run_extract(const JobManifest& manifest, const PipelineConfig& config, const fs::path& out,
                      const ExtractOptions& options) {
    config.validate();
    auto started = std::chrono::steady_clock::now();
    LanguageCascade cascade = load_cascade(config.lang_model_dir, config.lang, config.external_detector);
    UrlRules rules = load_rules(config.url_rules);

    const fs::path shard_dir = out / "shards";
    std::error_code ec;
    fs::create_directories(shard_dir, ec);
    if (ec) throw IoError("cannot create " + shard_dir.string() + ": " + ec.message());
    save_manifest(manifest, out / "manifest.json");

    ExtractContext ctx{config, cascade, rules, shard_dir, options.stop};
    RunReport report;
    report.segments.resize(manifest.segments.size());

    parallel_for(manifest.segments.size(), config.worker_count, [&](std::size_t i) {
        const ManifestEntry& entry = manifest.segments[i];
        SegmentReport& seg = report.segments[i];
        seg.url_warc = canonical_warc_url(entry.ref);
        const fs::path done = shard_dir / (shard_stem(i) + ".done");
        const fs::path shard = shard_dir / (shard_stem(i) + ".jsonl");
        if (options.resume && fs::exists(shard)) {
            if (auto c = read_done_marker(done, seg.url_warc)) {
                seg.status = SegmentStatus::done;
                seg.counters = *c;
                return;
            }
        }
        if (options.stop && options.stop->load()) {
            seg.status = SegmentStatus::skipped;
            return;
        }
        fs::remove(done);
        fs::remove(shard);
        auto t0 = std::chrono::steady_clock::now();
        try {
            seg.counters = process_segment(entry, i, ctx);
            seg.status = SegmentStatus::done;
        } catch (const Interrupted&) {
            seg.status = SegmentStatus::skipped;
            seg.error = "interrupted";
            fs::path tmp = shard;
            tmp += ".tmp";
            fs::remove(tmp);
        } catch (const std::exception& e) {
            seg.status = SegmentStatus::failed;
            seg.error = e.what();
            seg.counters = {};
            fs::path tmp = shard;
            tmp += ".tmp";
            fs::remove(tmp);
        }
        seg.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    });

    for (const auto& seg : report.segments)
        if (seg.status == SegmentStatus::done) report.extract += seg.counters;
    report.phase_seconds["extract"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    save_report(report, out / "extract_report.json");
    return report;
}

}  // namespace warcpipe
