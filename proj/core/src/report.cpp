#include <fstream>
#include <sstream>

#include "json.hpp"
#include "warcpipe/errors.hpp"
#include "warcpipe/pipeline.hpp"

namespace warcpipe {

using ordered_json = nlohmann::ordered_json;

ExtractCounters& ExtractCounters::operator+=(const ExtractCounters& o) {
    fetched += o.fetched;
    responses += o.responses;
    decoded += o.decoded;
    lang_accepted += o.lang_accepted;
    extracted += o.extracted;
    skipped_corrupt += o.skipped_corrupt;
    url_denied += o.url_denied;
    return *this;
}

std::string_view to_string(SegmentStatus s) {
    switch (s) {
        case SegmentStatus::done: return "done";
        case SegmentStatus::failed: return "failed";
        case SegmentStatus::skipped: return "skipped";
    }
    return "skipped";
}

namespace {

SegmentStatus status_from(std::string_view s) {
    if (s == "done") return SegmentStatus::done;
    if (s == "failed") return SegmentStatus::failed;
    if (s == "skipped") return SegmentStatus::skipped;
    throw ValidationError("unknown segment status '" + std::string(s) + "'");
}

ordered_json counters_json(const ExtractCounters& c) {
    ordered_json j;
    j["fetched"] = c.fetched;
    j["responses"] = c.responses;
    j["decoded"] = c.decoded;
    j["lang_accepted"] = c.lang_accepted;
    j["extracted"] = c.extracted;
    j["skipped_corrupt"] = c.skipped_corrupt;
    j["url_denied"] = c.url_denied;
    return j;
}

ExtractCounters counters_from(const nlohmann::json& j) {
    ExtractCounters c;
    c.fetched = j.at("fetched").get<std::uint64_t>();
    c.responses = j.at("responses").get<std::uint64_t>();
    c.decoded = j.at("decoded").get<std::uint64_t>();
    c.lang_accepted = j.at("lang_accepted").get<std::uint64_t>();
    c.extracted = j.at("extracted").get<std::uint64_t>();
    c.skipped_corrupt = j.value("skipped_corrupt", std::uint64_t{0});
    c.url_denied = j.value("url_denied", std::uint64_t{0});
    return c;
}

}  // namespace

std::vector<std::pair<std::string, std::uint64_t>> RunReport::stage_counts() const {
    std::vector<std::pair<std::string, std::uint64_t>> out{
        {"fetched", extract.fetched},
        {"responses", extract.responses},
        {"decoded", extract.decoded},
        {"lang_accepted", extract.lang_accepted},
        {"extracted", extract.extracted},
    };
    if (dedup) {
        std::uint64_t after_doc = dedup->input - dedup->exact_doc_removed;
        std::uint64_t after_para = after_doc - dedup->emptied_doc_removed;
        out.emplace_back("deduped_exact_doc", after_doc);
        out.emplace_back("deduped_exact_para", after_para);
        out.emplace_back("deduped_lsh", after_para - dedup->lsh_removed);
        out.emplace_back("written", dedup->written);
    }
    return out;
}

bool RunReport::monotone() const {
    if (dedup && dedup->exact_doc_removed + dedup->emptied_doc_removed + dedup->lsh_removed > dedup->input) return false;
    auto counts = stage_counts();
    for (std::size_t i = 1; i < counts.size(); ++i)
        if (counts[i].second > counts[i - 1].second) return false;
    return true;
}

bool RunReport::conserved() const {
    if (!dedup) return true;
    if (dedup->input != extract.extracted) return false;
    std::uint64_t removed = dedup->exact_doc_removed + dedup->emptied_doc_removed + dedup->lsh_removed;
    return removed <= dedup->input && dedup->written == dedup->input - removed;
}

std::size_t RunReport::failed_segments() const {
    std::size_t n = 0;
    for (const auto& s : segments) n += s.status == SegmentStatus::failed;
    return n;
}

std::string RunReport::to_json() const {
    ordered_json j;
    ordered_json segs = ordered_json::array();
    for (const auto& s : segments) {
        ordered_json e;
        e["url_warc"] = s.url_warc;
        e["status"] = std::string(to_string(s.status));
        if (!s.error.empty()) e["error"] = s.error;
        e["counters"] = counters_json(s.counters);
        e["seconds"] = s.seconds;
        segs.push_back(std::move(e));
    }
    j["segments"] = std::move(segs);
    j["extract"] = counters_json(extract);
    if (dedup) {
        ordered_json d;
        d["input"] = dedup->input;
        d["malformed_lines"] = dedup->malformed_lines;
        d["exact_doc_removed"] = dedup->exact_doc_removed;
        d["exact_para_removed"] = dedup->exact_para_removed;
        d["emptied_doc_removed"] = dedup->emptied_doc_removed;
        d["lsh_removed"] = dedup->lsh_removed;
        d["candidate_pairs"] = dedup->candidate_pairs;
        d["written"] = dedup->written;
        d["records_written"] = dedup->records_written;
        j["dedup"] = std::move(d);
    }
    ordered_json stages = ordered_json::object();
    for (const auto& [name, count] : stage_counts()) stages[name] = count;
    j["stages"] = std::move(stages);
    j["conserved"] = conserved();
    ordered_json phases = ordered_json::object();
    for (const auto& [name, secs] : phase_seconds) phases[name] = secs;
    j["phase_seconds"] = std::move(phases);
    return j.dump(2);
}

RunReport RunReport::from_json(std::string_view text) {
    RunReport r;
    try {
        auto j = nlohmann::json::parse(text);
        for (const auto& e : j.at("segments")) {
            SegmentReport s;
            s.url_warc = e.at("url_warc").get<std::string>();
            s.status = status_from(e.at("status").get<std::string>());
            s.error = e.value("error", "");
            s.counters = counters_from(e.at("counters"));
            s.seconds = e.value("seconds", 0.0);
            r.segments.push_back(std::move(s));
        }
        r.extract = counters_from(j.at("extract"));
        if (j.contains("dedup")) {
            const auto& d = j.at("dedup");
            DedupCounters c;
            c.input = d.at("input").get<std::uint64_t>();
            c.malformed_lines = d.at("malformed_lines").get<std::uint64_t>();
            c.exact_doc_removed = d.at("exact_doc_removed").get<std::uint64_t>();
            c.exact_para_removed = d.at("exact_para_removed").get<std::uint64_t>();
            c.emptied_doc_removed = d.at("emptied_doc_removed").get<std::uint64_t>();
            c.lsh_removed = d.at("lsh_removed").get<std::uint64_t>();
            c.candidate_pairs = d.at("candidate_pairs").get<std::uint64_t>();
            c.written = d.at("written").get<std::uint64_t>();
            c.records_written = d.at("records_written").get<std::uint64_t>();
            r.dedup = c;
        }
        if (j.contains("phase_seconds"))
            for (const auto& [k, v] : j.at("phase_seconds").items()) r.phase_seconds[k] = v.get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed run report: ") + e.what());
    }
    return r;
}

void save_report(const RunReport& report, const std::filesystem::path& path) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << report.to_json() << '\n';
        if (!out) throw IoError("cannot write report " + path.string());
    }
    std::filesystem::rename(tmp, path);
}

RunReport load_report(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read report " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return RunReport::from_json(ss.str());
}

}  // namespace warcpipe
