#include <chrono>
#include <ctime>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "warcpipe/errors.hpp"
#include "warcpipe/gzip_stream.hpp"
#include "warcpipe/pipeline.hpp"

namespace warcpipe {

namespace fs = std::filesystem;

namespace {

// Uniform draw in [0, bound) without the implementation-defined behaviour of
// std::uniform_int_distribution.
std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t bound) {
    std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

std::string utc_timestamp() {
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

JobManifest shuffle_manifest(std::vector<ManifestEntry> segments, std::uint64_t seed) {
    std::set<WarcSegmentRef> seen;
    for (const auto& e : segments) {
        validate(e.ref);
        if (!seen.insert(e.ref).second) throw ValidationError("duplicate segment in manifest: " + canonical_warc_url(e.ref));
    }
    std::mt19937_64 rng(seed);
    for (std::size_t i = segments.size(); i > 1; --i) {
        std::size_t j = draw_below(rng, i);
        std::swap(segments[i - 1], segments[j]);
    }
    return JobManifest{std::move(segments), seed, utc_timestamp()};
}

JobManifest sample_manifest(std::vector<ManifestEntry> segments, std::uint64_t seed, std::size_t limit) {
    JobManifest m = shuffle_manifest(std::move(segments), seed);
    if (limit > 0 && m.segments.size() > limit) m.segments.resize(limit);
    return m;
}

std::vector<ManifestEntry> parse_paths_listing(std::string_view text, std::string_view crawl,
                                               const std::optional<fs::path>& root) {
    std::vector<ManifestEntry> out;
    std::size_t start = 0;
    std::size_t lineno = 0;
    while (start < text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = trim(text.substr(start, nl - start));
        start = nl + 1;
        ++lineno;
        if (line.empty() || line.front() == '#') continue;
        WarcSegmentRef ref;
        try {
            ref = parse_warc_url(line);
        } catch (const ValidationError& e) {
            throw ValidationError("paths listing line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!crawl.empty() && ref.crawl_id != crawl) continue;
        std::string location = canonical_warc_url(ref);
        if (root) {
            constexpr std::string_view kBucket = "s3://commoncrawl/";
            location = (*root / location.substr(kBucket.size())).string();
        }
        out.push_back({std::move(ref), std::move(location)});
    }
    return out;
}

std::string read_listing(const std::string& location, const RetryPolicy& retry) {
    auto source = open_source(location, retry);
    std::string raw;
    std::vector<unsigned char> buf(1 << 16);
    while (std::size_t n = source->read(buf)) raw.append(reinterpret_cast<const char*>(buf.data()), n);
    if (raw.size() < 2 || static_cast<unsigned char>(raw[0]) != 0x1f || static_cast<unsigned char>(raw[1]) != 0x8b)
        return raw;
    MemorySource mem(raw);
    GzipStreamReader gz(mem);
    std::string text;
    while (true) {
        GzipChunk c = gz.read(buf);
        if (c.size > 0) text.append(reinterpret_cast<const char*>(buf.data()), c.size);
        if (c.end_of_stream) break;
    }
    if (gz.corrupt_regions() > 0) throw IoError("corrupt gzip listing: " + location);
    return text;
}

void save_manifest(const JobManifest& manifest, const fs::path& path) {
    nlohmann::ordered_json j;
    j["shuffle_seed"] = manifest.shuffle_seed;
    j["created_at"] = manifest.created_at;
    nlohmann::ordered_json segs = nlohmann::ordered_json::array();
    for (const auto& e : manifest.segments) {
        nlohmann::ordered_json s;
        s["url_warc"] = canonical_warc_url(e.ref);
        s["location"] = e.location;
        segs.push_back(std::move(s));
    }
    j["segments"] = std::move(segs);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("cannot write manifest " + path.string());
}

JobManifest load_manifest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read manifest " + path.string());
    JobManifest m;
    try {
        auto j = nlohmann::json::parse(in);
        m.shuffle_seed = j.at("shuffle_seed").get<std::uint64_t>();
        m.created_at = j.value("created_at", "");
        std::set<WarcSegmentRef> seen;
        for (const auto& s : j.at("segments")) {
            ManifestEntry e;
            e.ref = parse_warc_url(s.at("url_warc").get<std::string>());
            e.location = s.value("location", canonical_warc_url(e.ref));
            if (!seen.insert(e.ref).second) throw ValidationError("duplicate segment " + canonical_warc_url(e.ref));
            m.segments.push_back(std::move(e));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed manifest " + path.string() + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ConfigError("invalid manifest " + path.string() + ": " + e.what());
    }
    return m;
}

}  // namespace warcpipe
