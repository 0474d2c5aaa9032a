#include <cstdio>
#include <mutex>
#include <sstream>

#include "json.hpp"
#include "warcpipe/corpus.hpp"
#include "warcpipe/parallel.hpp"
#include "warcpipe/utf8.hpp"

namespace warcpipe {

namespace {

bool is_space(char32_t c) {
    return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v' || c == 0x85 ||
           c == 0xA0 || c == 0x1680 || (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F ||
           c == 0x205F || c == 0x3000;
}

bool is_terminator(char32_t c) { return c == U'.' || c == U'?' || c == U'!' || c == 0x2026; }

}  // namespace

CorpusStats& CorpusStats::operator+=(const CorpusStats& o) {
    bytes += o.bytes;
    documents += o.documents;
    paragraphs += o.paragraphs;
    words += o.words;
    sentences += o.sentences;
    lines += o.lines;
    malformed_lines += o.malformed_lines;
    return *this;
}

CorpusStats text_stats(std::string_view text) {
    CorpusStats s;
    if (text.empty()) return s;
    s.paragraphs = 1;
    bool in_word = false;
    bool after_terminator = false;
    std::size_t pos = 0;
    while (pos < text.size()) {
        char32_t c = utf8::next(text, pos);
        bool space = is_space(c);
        if (after_terminator && space) ++s.sentences;
        if (!space && !in_word) ++s.words;
        in_word = !space;
        if (is_terminator(c))
            after_terminator = true;
        else
            after_terminator = false;
        if (c == U'\n') ++s.paragraphs;
    }
    if (after_terminator) ++s.sentences;
    return s;
}

CorpusStats compute_stats(const std::vector<std::filesystem::path>& chunks, std::size_t workers) {
    std::vector<CorpusStats> partial(chunks.size());
    parallel_for(chunks.size(), workers, [&](std::size_t i) {
        CorpusStats& s = partial[i];
        s.bytes = std::filesystem::file_size(chunks[i]);
        ReadCounters rc;
        for_each_record(
            chunks[i],
            [&](CorpusRecord&& r) {
                CorpusStats t = text_stats(r.text);
                ++s.documents;
                s.paragraphs += t.paragraphs;
                s.words += t.words;
                s.sentences += t.sentences;
            },
            &rc);
        s.lines = rc.lines;
        s.malformed_lines = rc.malformed;
    });
    CorpusStats total;
    for (const auto& p : partial) total += p;
    return total;
}

std::string stats_to_json(const CorpusStats& s) {
    nlohmann::ordered_json j;
    j["bytes"] = s.bytes;
    j["documents"] = s.documents;
    j["paragraphs"] = s.paragraphs;
    j["words"] = s.words;
    j["sentences"] = s.sentences;
    j["lines"] = s.lines;
    j["malformed_lines"] = s.malformed_lines;
    return j.dump(2);
}

std::string stats_to_table(const CorpusStats& s) {
    std::ostringstream out;
    auto row = [&](const char* name, std::uint64_t v) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%-16s %20llu\n", name, static_cast<unsigned long long>(v));
        out << buf;
    };
    row("bytes", s.bytes);
    row("documents", s.documents);
    row("paragraphs", s.paragraphs);
    row("words", s.words);
    row("sentences", s.sentences);
    row("lines", s.lines);
    row("malformed_lines", s.malformed_lines);
    return out.str();
}

}  // namespace warcpipe
