#include "warcpipe/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "json.hpp"

#include "warcpipe/errors.hpp"
#include "warcpipe/utf8.hpp"
#include "warcpipe/warc.hpp"

namespace warcpipe {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

void validate(const CorpusRecord& rec) {
    if (!is_uuid_v4(rec.id)) throw ValidationError("record id is not a UUIDv4: '" + rec.id + "'");
    if (rec.text.empty()) throw ValidationError("record " + rec.id + " has empty text");
    if (rec.text.find('\r') != std::string::npos) throw ValidationError("record " + rec.id + " contains a carriage return");
    if (rec.text.find("\n\n") != std::string::npos)
        throw ValidationError("record " + rec.id + " contains consecutive newlines");
    if (!utf8::is_valid(rec.text)) throw ValidationError("record " + rec.id + " text is not valid UTF-8");
    WarcSegmentRef ref = parse_warc_url(rec.url_warc);
    if (canonical_warc_url(ref) != rec.url_warc)
        throw ValidationError("record " + rec.id + " url_warc is not canonical: '" + rec.url_warc + "'");
}

CorpusRecord make_record(const Document& doc, IdSource& ids, std::uint64_t ordinal) {
    if (doc.paragraphs.empty()) throw std::invalid_argument("cannot make a record from an empty document: " + doc.url);
    return CorpusRecord{ids.next_id(doc, ordinal), doc.joined_text('\n'), doc.warc_url, doc.url};
}

std::vector<CorpusRecord> make_paragraph_records(const Document& doc, IdSource& ids, std::uint64_t base_ordinal) {
    if (doc.paragraphs.empty()) throw std::invalid_argument("cannot make records from an empty document: " + doc.url);
    std::vector<CorpusRecord> out;
    out.reserve(doc.paragraphs.size());
    for (std::size_t i = 0; i < doc.paragraphs.size(); ++i)
        out.push_back({ids.next_id(doc, base_ordinal + i), doc.paragraphs[i].text, doc.warc_url, doc.url});
    return out;
}

std::string to_json_line(const CorpusRecord& rec) {
    ordered_json j;
    j["id"] = rec.id;
    j["text"] = rec.text;
    j["url_warc"] = rec.url_warc;
    j["url"] = rec.url;
    return j.dump(-1, ' ', false, ordered_json::error_handler_t::strict);
}

CorpusRecord from_json_line(std::string_view line) {
    ordered_json j;
    try {
        j = ordered_json::parse(line);
    } catch (const ordered_json::parse_error& e) {
        throw ValidationError(std::string("malformed JSON line: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("JSON line is not an object");
    auto field = [&](const char* name) -> std::string {
        auto it = j.find(name);
        if (it == j.end() || !it->is_string()) throw ValidationError(std::string("missing or non-string field '") + name + "'");
        return it->get<std::string>();
    };
    return CorpusRecord{field("id"), field("text"), field("url_warc"), field("url")};
}

Document to_document(const CorpusRecord& rec) {
    Document doc;
    doc.id = rec.id;
    doc.url = rec.url;
    doc.warc_url = rec.url_warc;
    std::string_view text = rec.text;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) nl = text.size();
        if (nl > start) doc.paragraphs.push_back({doc.paragraphs.size(), std::string(text.substr(start, nl - start))});
        start = nl + 1;
    }
    return doc;
}

ChunkWriter::ChunkWriter(fs::path dir, std::uint64_t chunk_bytes, std::string prefix)
    : dir_(std::move(dir)), chunk_bytes_(chunk_bytes), prefix_(std::move(prefix)) {
    if (chunk_bytes_ < kMinChunkBytes)
        throw std::invalid_argument("chunk_bytes must be at least 1 MB, got " + std::to_string(chunk_bytes_));
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
}

ChunkWriter::~ChunkWriter() {
    // An unfinished writer leaves the manifest marked incomplete.
    if (out_.is_open()) out_.close();
}

void ChunkWriter::open_next() {
    char name[32];
    std::snprintf(name, sizeof name, "%05zu.jsonl", done_.size());
    fs::path path = dir_ / (prefix_ + name);
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw IoError("cannot open chunk " + path.string());
    current_bytes_ = 0;
    current_records_ = 0;
}

void ChunkWriter::close_current() {
    if (!out_.is_open()) return;
    out_.flush();
    bool ok = static_cast<bool>(out_);
    out_.close();
    if (!ok) throw IoError("write failed on chunk " + std::to_string(done_.size()));
    char name[32];
    std::snprintf(name, sizeof name, "%05zu.jsonl", done_.size());
    done_.push_back(dir_ / (prefix_ + name));
    done_records_.push_back(current_records_);
}

void ChunkWriter::write_manifest(bool complete) {
    ordered_json j;
    j["complete"] = complete;
    j["chunk_bytes"] = chunk_bytes_;
    j["records"] = records_;
    ordered_json chunks = ordered_json::array();
    for (std::size_t i = 0; i < done_.size(); ++i) {
        ordered_json c;
        c["file"] = done_[i].filename().string();
        c["records"] = done_records_[i];
        c["bytes"] = fs::file_size(done_[i]);
        chunks.push_back(std::move(c));
    }
    j["chunks"] = std::move(chunks);
    fs::path tmp = dir_ / (prefix_ + "manifest.json.tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << j.dump(2) << '\n';
        if (!out) throw IoError("cannot write chunk manifest in " + dir_.string());
    }
    fs::rename(tmp, dir_ / "chunks.manifest.json");
}

void ChunkWriter::write(const CorpusRecord& rec) { write_line(to_json_line(rec)); }

void ChunkWriter::write_line(std::string_view json_line) {
    if (finished_) throw std::logic_error("ChunkWriter used after finish()");
    std::uint64_t size = json_line.size() + 1;
    if (out_.is_open() && current_records_ > 0 && current_bytes_ + size > chunk_bytes_) {
        close_current();
        write_manifest(false);
    }
    if (!out_.is_open()) open_next();
    out_.write(json_line.data(), static_cast<std::streamsize>(json_line.size()));
    out_.put('\n');
    if (!out_) throw IoError("write failed on chunk " + std::to_string(done_.size()));
    current_bytes_ += size;
    ++current_records_;
    ++records_;
}

std::vector<fs::path> ChunkWriter::finish() {
    if (!finished_) {
        close_current();
        write_manifest(true);
        finished_ = true;
    }
    return done_;
}

std::vector<fs::path> write_chunks(const std::vector<CorpusRecord>& records, const fs::path& dir,
                                   std::uint64_t chunk_bytes) {
    ChunkWriter writer(dir, chunk_bytes);
    for (const auto& r : records) writer.write(r);
    return writer.finish();
}

std::vector<fs::path> list_jsonl(const fs::path& dir, std::initializer_list<std::string_view> prefixes) {
    std::vector<fs::path> out;
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".jsonl") continue;
        std::string name = entry.path().filename().string();
        for (auto p : prefixes) {
            if (name.starts_with(p)) {
                out.push_back(entry.path());
                break;
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

void for_each_record(const fs::path& file, const std::function<void(CorpusRecord&&)>& fn, ReadCounters* counters) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open " + file.string());
    std::string line;
    while (std::getline(in, line)) {
        if (counters) ++counters->lines;
        CorpusRecord rec;
        try {
            rec = from_json_line(line);
        } catch (const ValidationError&) {
            if (counters) ++counters->malformed;
            continue;
        }
        fn(std::move(rec));
    }
}

std::vector<CorpusRecord> read_records(const std::vector<fs::path>& files, ReadCounters* counters) {
    std::vector<CorpusRecord> out;
    for (const auto& f : files) for_each_record(f, [&](CorpusRecord&& r) { out.push_back(std::move(r)); }, counters);
    return out;
}

}  // namespace warcpipe
