#include <csignal>
#include <iostream>

#include "CLI11.hpp"
#include "warcpipe/errors.hpp"
#include "warcpipe/pipeline.hpp"

namespace fs = std::filesystem;
using namespace warcpipe;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitPartial = 2;

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop.store(true); }

PipelineConfig config_from(const std::string& path) {
    return path.empty() ? default_config() : load_config(path);
}

int cmd_manifest(const std::string& crawl, const std::string& paths, const std::string& root, std::size_t limit,
                 std::uint64_t seed, const std::string& out) {
    std::string listing = paths.empty() ? "https://data.commoncrawl.org/crawl-data/" + crawl + "/warc.paths.gz" : paths;
    std::optional<fs::path> mirror;
    if (!root.empty()) mirror = fs::path(root);
    auto entries = parse_paths_listing(read_listing(listing), crawl, mirror);
    if (entries.empty()) throw ConfigError("no segments of " + crawl + " in " + listing);
    JobManifest m = sample_manifest(std::move(entries), seed, limit);
    save_manifest(m, out);
    std::cout << "manifest: " << m.segments.size() << " segments written to " << out << '\n';
    return 0;
}

int cmd_extract(const std::string& manifest_path, const std::string& config_path, std::size_t workers,
                const std::string& out, bool no_resume) {
    PipelineConfig config = config_from(config_path);
    if (workers > 0) config.worker_count = workers;
    JobManifest manifest = load_manifest(manifest_path);
    ExtractOptions options;
    options.stop = &g_stop;
    options.resume = !no_resume;
    RunReport report = run_extract(manifest, config, out, options);
    const auto& c = report.extract;
    std::cout << "extract: " << manifest.segments.size() << " segments, " << report.failed_segments() << " failed; "
              << c.fetched << " records, " << c.responses << " html responses, " << c.decoded << " decoded, "
              << c.lang_accepted << " language-accepted, " << c.extracted << " extracted\n";
    for (const auto& s : report.segments)
        if (s.status == SegmentStatus::failed) std::cerr << "failed: " << s.url_warc << ": " << s.error << '\n';
    bool incomplete = report.failed_segments() > 0 || g_stop.load();
    return incomplete ? kExitPartial : 0;
}

int cmd_dedup(const std::string& in, const std::string& out, const std::string& config_path,
              std::optional<double> threshold, std::optional<std::uint64_t> seed, std::size_t workers) {
    PipelineConfig config = config_from(config_path);
    if (threshold) config.lsh.jaccard_threshold = *threshold;
    if (seed) config.lsh_seed = *seed;
    if (workers > 0) config.worker_count = workers;
    RunReport report = run_dedup(in, config, out);
    const auto& d = *report.dedup;
    std::cout << "dedup: " << d.input << " documents in; removed " << d.exact_doc_removed << " exact, "
              << d.emptied_doc_removed << " emptied by " << d.exact_para_removed << " repeated paragraphs, "
              << d.lsh_removed << " near-duplicates; " << d.written << " written\n";
    return d.malformed_lines > 0 ? kExitPartial : 0;
}

int cmd_stats(const std::string& in, bool json, std::size_t workers) {
    fs::path dir = fs::is_directory(fs::path(in) / "shards") ? fs::path(in) / "shards" : fs::path(in);
    CorpusStats s = compute_stats(list_jsonl(dir), std::max<std::size_t>(1, workers));
    std::cout << (json ? stats_to_json(s) + "\n" : stats_to_table(s));
    return s.malformed_lines > 0 ? kExitPartial : 0;
}

int cmd_filter(const std::string& rules_path, const std::string& in, const std::string& out,
               std::uint64_t chunk_bytes) {
    UrlRules rules = UrlRules::from_file(rules_path);
    FilterCounters c = filter_corpus(in, rules, out, chunk_bytes);
    std::cout << "filter: kept " << c.kept << " of " << c.input << " records\n";
    return c.malformed_lines > 0 ? kExitPartial : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Common Crawl WARC to clean, deduplicated JSONL corpus"};
    app.require_subcommand(1);

    std::string crawl, paths, root, out = "manifest.json";
    std::size_t limit = 0;
    std::uint64_t seed = 0;
    auto* manifest = app.add_subcommand("manifest", "Build a shuffled segment manifest from a warc.paths listing");
    manifest->add_option("--crawl", crawl, "Crawl id, e.g. CC-MAIN-2019-04")->required();
    manifest->add_option("--paths", paths, "Listing location (default: the crawl's warc.paths.gz)");
    manifest->add_option("--root", root, "Read segments from a local mirror of the bucket layout");
    manifest->add_option("--limit", limit, "Keep the first N segments after shuffling (0: all)");
    manifest->add_option("--seed", seed, "Shuffle seed");
    manifest->add_option("--out", out, "Manifest file to write");

    std::string manifest_path, config_path, extract_out;
    std::size_t workers = 0;
    bool no_resume = false;
    auto* extract = app.add_subcommand("extract", "Extract language-filtered documents per segment");
    extract->add_option("--manifest", manifest_path)->required();
    extract->add_option("--config", config_path, "Key-value configuration file");
    extract->add_option("--workers", workers, "Worker threads (overrides worker_count)");
    extract->add_option("--out", extract_out)->required();
    extract->add_flag("--no-resume", no_resume, "Reprocess segments that already have a done marker");

    std::string dedup_in, dedup_out, dedup_config;
    std::optional<double> threshold;
    std::optional<std::uint64_t> dedup_seed;
    std::size_t dedup_workers = 0;
    auto* dedup = app.add_subcommand("dedup", "Exact and near-duplicate removal into corpus chunks");
    dedup->add_option("--in", dedup_in)->required();
    dedup->add_option("--out", dedup_out)->required();
    dedup->add_option("--threshold", threshold, "Jaccard threshold for near-duplicates");
    dedup->add_option("--seed", dedup_seed, "MinHash seed");
    dedup->add_option("--config", dedup_config, "Key-value configuration file");
    dedup->add_option("--workers", dedup_workers);

    std::string stats_in;
    bool stats_json = false;
    std::size_t stats_workers = 1;
    auto* stats = app.add_subcommand("stats", "Corpus statistics over JSONL chunks");
    stats->add_option("--in", stats_in)->required();
    stats->add_flag("--json", stats_json, "Emit JSON instead of a table");
    stats->add_option("--workers", stats_workers);

    std::string rules_path, filter_in, filter_out;
    std::uint64_t chunk_bytes = kDefaultChunkBytes;
    auto* filter = app.add_subcommand("filter", "Apply URL allow/deny rules to a corpus");
    filter->add_option("--rules", rules_path)->required();
    filter->add_option("--in", filter_in)->required();
    filter->add_option("--out", filter_out)->required();
    filter->add_option("--chunk-bytes", chunk_bytes);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    try {
        if (*manifest) return cmd_manifest(crawl, paths, root, limit, seed, out);
        if (*extract) return cmd_extract(manifest_path, config_path, workers, extract_out, no_resume);
        if (*dedup) return cmd_dedup(dedup_in, dedup_out, dedup_config, threshold, dedup_seed, dedup_workers);
        if (*stats) return cmd_stats(stats_in, stats_json, stats_workers);
        if (*filter) return cmd_filter(rules_path, filter_in, filter_out, chunk_bytes);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ValidationError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitPartial;
    }
    return 0;
}
