#include <charconv>
#include <fstream>
#include <sstream>

#include "warcpipe/errors.hpp"
#include "warcpipe/pipeline.hpp"

namespace warcpipe {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <class T>
T parse_number(std::string_view key, std::string_view value) {
    T out{};
    const char* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end)
        throw ConfigError("invalid value for " + std::string(key) + ": '" + std::string(value) + "'");
    return out;
}

std::uint64_t parse_u64(std::string_view key, std::string_view value) {
    if (value.starts_with("0x") || value.starts_with("0X")) {
        std::uint64_t out = 0;
        const char* end = value.data() + value.size();
        auto [ptr, ec] = std::from_chars(value.data() + 2, end, out, 16);
        if (ec != std::errc() || ptr != end || value.size() == 2)
            throw ConfigError("invalid value for " + std::string(key) + ": '" + std::string(value) + "'");
        return out;
    }
    return parse_number<std::uint64_t>(key, value);
}

fs::path resolve(const fs::path& base, std::string_view value) {
    fs::path p{std::string(value)};
    if (p.is_relative() && !base.empty()) p = base / p;
    return p;
}

}  // namespace

PipelineConfig default_config() {
    PipelineConfig c;
    c.lang_model_dir = WARCPIPE_DEFAULT_MODEL_DIR;
    return c;
}

PipelineConfig parse_config(std::string_view text, const fs::path& base_dir) {
    PipelineConfig c = default_config();
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string_view line = raw;
        if (std::size_t hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key(trim(line.substr(0, eq)));
        std::string_view v = trim(line.substr(eq + 1));
        if (key == "lang_target") c.lang.target = std::string(v);
        else if (key == "min_conf") c.lang.min_conf = parse_number<double>(key, v);
        else if (key == "min_chars") c.lang.min_chars = parse_number<std::size_t>(key, v);
        else if (key == "lang_model_dir") c.lang_model_dir = resolve(base_dir, v);
        else if (key == "external_detector") c.external_detector = std::string(v);
        else if (key == "min_words") c.cleaning.min_words = parse_number<std::size_t>(key, v);
        else if (key == "min_alpha_ratio") c.cleaning.min_alpha_ratio = parse_number<double>(key, v);
        else if (key == "max_replacement_ratio") c.max_replacement_ratio = parse_number<double>(key, v);
        else if (key == "shingle_size") c.lsh.shingle_size = parse_number<std::size_t>(key, v);
        else if (key == "num_perms") c.lsh.num_perms = parse_number<std::size_t>(key, v);
        else if (key == "bands") c.lsh.bands = parse_number<std::size_t>(key, v);
        else if (key == "rows") c.lsh.rows = parse_number<std::size_t>(key, v);
        else if (key == "jaccard_threshold") c.lsh.jaccard_threshold = parse_number<double>(key, v);
        else if (key == "chunk_bytes") c.chunk_bytes = parse_u64(key, v);
        else if (key == "worker_count") c.worker_count = parse_number<std::size_t>(key, v);
        else if (key == "url_rules") c.url_rules.push_back(resolve(base_dir, v));
        else if (key == "id_seed") c.id_seed = v == "random" ? std::nullopt : std::optional(parse_u64(key, v));
        else if (key == "lsh_seed") c.lsh_seed = parse_u64(key, v);
        else if (key == "record_granularity") {
            if (v == "document") c.granularity = RecordGranularity::document;
            else if (v == "paragraph") c.granularity = RecordGranularity::paragraph;
            else throw ConfigError("record_granularity must be document or paragraph, got '" + std::string(v) + "'");
        } else if (key == "fetch_attempts") c.retry.attempts = parse_number<int>(key, v);
        else if (key == "fetch_backoff_ms") c.retry.initial_backoff = std::chrono::milliseconds(parse_number<long>(key, v));
        else throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    return c;
}

PipelineConfig load_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

void PipelineConfig::validate() const {
    if (lang.target.empty()) throw ConfigError("lang_target must not be empty");
    if (!(lang.min_conf >= 0.0 && lang.min_conf <= 1.0)) throw ConfigError("min_conf must lie in [0, 1]");
    if (!(cleaning.min_alpha_ratio >= 0.0 && cleaning.min_alpha_ratio <= 1.0))
        throw ConfigError("min_alpha_ratio must lie in [0, 1]");
    if (!(max_replacement_ratio >= 0.0 && max_replacement_ratio <= 1.0))
        throw ConfigError("max_replacement_ratio must lie in [0, 1]");
    lsh.validate();
    if (chunk_bytes < kMinChunkBytes) throw ConfigError("chunk_bytes must be at least 1 MB");
    if (worker_count == 0) throw ConfigError("worker_count must be positive");
    if (retry.attempts < 1) throw ConfigError("fetch_attempts must be positive");
    if (retry.initial_backoff.count() < 0) throw ConfigError("fetch_backoff_ms must not be negative");
    if (!fs::is_directory(lang_model_dir / "stage1"))
        throw ConfigError("language model directory lacks stage1: " + lang_model_dir.string());
    if (external_detector.empty() && !fs::is_directory(lang_model_dir / "stage2"))
        throw ConfigError("language model directory lacks stage2: " + lang_model_dir.string());
    for (const auto& p : url_rules)
        if (!fs::is_regular_file(p)) throw ConfigError("URL rules file not found: " + p.string());
}

}  // namespace warcpipe
