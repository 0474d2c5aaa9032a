#include "warcpipe/warc.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <regex>

#include "warcpipe/errors.hpp"

namespace warcpipe {

namespace {

constexpr std::string_view kBucketPrefix = "s3://commoncrawl/";
constexpr std::string_view kHttpsPrefix = "https://data.commoncrawl.org/";
constexpr std::size_t kMaxHeaderBlock = 1 << 20;

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) ==
                      std::tolower(static_cast<unsigned char>(y));
           });
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool valid_path_component(std::string_view s) {
    return !s.empty() && s.find('/') == std::string_view::npos &&
           std::none_of(s.begin(), s.end(), [](unsigned char c) { return c <= 0x20 || c == 0x7f; });
}

// Parses "Name: value" lines (with obs-fold continuations) up to the end of
// `block`, which excludes the terminating blank line.
HeaderList parse_header_lines(std::string_view block) {
    HeaderList headers;
    while (!block.empty()) {
        std::size_t eol = block.find('\n');
        std::string_view line = block.substr(0, eol);
        block = eol == std::string_view::npos ? std::string_view{} : block.substr(eol + 1);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if ((line.front() == ' ' || line.front() == '\t') && !headers.empty()) {
            headers.back().second += ' ';
            headers.back().second += trim(line);
            continue;
        }
        std::size_t colon = line.find(':');
        if (colon == std::string_view::npos) continue;
        headers.emplace_back(std::string(trim(line.substr(0, colon))), std::string(trim(line.substr(colon + 1))));
    }
    return headers;
}

// Returns the offset just past the blank line ending a header block starting
// at `from`, or npos. `body_start` receives the same value.
std::size_t find_header_end(std::string_view s, std::size_t from, std::size_t& block_end) {
    for (std::size_t i = s.find('\n', from); i != std::string_view::npos; i = s.find('\n', i + 1)) {
        std::size_t j = i + 1;
        if (j < s.size() && s[j] == '\r') ++j;
        if (j < s.size() && s[j] == '\n') {
            block_end = i + 1;
            return j + 1;
        }
        if (j >= s.size()) return std::string_view::npos;
    }
    return std::string_view::npos;
}

}  // namespace

void validate(const WarcSegmentRef& ref) {
    static const std::regex crawl_pattern(R"(CC-MAIN-\d{4}-\d{2})");
    if (!std::regex_match(ref.crawl_id, crawl_pattern))
        throw ValidationError("malformed crawl id: '" + ref.crawl_id + "'");
    if (!valid_path_component(ref.segment_id))
        throw ValidationError("malformed segment id: '" + ref.segment_id + "'");
    if (!valid_path_component(ref.file_name) || !ref.file_name.ends_with(".warc.gz"))
        throw ValidationError("malformed WARC file name: '" + ref.file_name + "'");
}

std::string canonical_warc_url(const WarcSegmentRef& ref) {
    validate(ref);
    std::string out(kBucketPrefix);
    out += "crawl-data/";
    out += ref.crawl_id;
    out += "/segments/";
    out += ref.segment_id;
    out += "/warc/";
    out += ref.file_name;
    return out;
}

WarcSegmentRef parse_warc_url(std::string_view url) {
    std::string_view rest = url;
    if (rest.starts_with(kBucketPrefix)) rest.remove_prefix(kBucketPrefix.size());
    else if (rest.starts_with(kHttpsPrefix)) rest.remove_prefix(kHttpsPrefix.size());

    auto take = [&](std::string_view expect) {
        if (!rest.starts_with(expect))
            throw ValidationError("not a Common Crawl segment URL: '" + std::string(url) + "'");
        rest.remove_prefix(expect.size());
    };
    auto component = [&] {
        std::size_t slash = rest.find('/');
        std::string_view c = rest.substr(0, slash);
        rest = slash == std::string_view::npos ? std::string_view{} : rest.substr(slash + 1);
        return std::string(c);
    };

    take("crawl-data/");
    WarcSegmentRef ref;
    ref.crawl_id = component();
    take("segments/");
    ref.segment_id = component();
    take("warc/");
    ref.file_name = std::string(rest);
    validate(ref);
    return ref;
}

std::string_view to_string(RecordType t) {
    switch (t) {
        case RecordType::request: return "request";
        case RecordType::response: return "response";
        case RecordType::metadata: return "metadata";
        case RecordType::warcinfo: return "warcinfo";
        case RecordType::other: return "other";
    }
    return "other";
}

RecordType record_type_from_header(std::string_view warc_type) {
    warc_type = trim(warc_type);
    if (iequals(warc_type, "response")) return RecordType::response;
    if (iequals(warc_type, "request")) return RecordType::request;
    if (iequals(warc_type, "metadata")) return RecordType::metadata;
    if (iequals(warc_type, "warcinfo")) return RecordType::warcinfo;
    return RecordType::other;
}

std::optional<std::string_view> find_header(const HeaderList& headers, std::string_view name) {
    for (const auto& [k, v] : headers)
        if (iequals(k, name)) return std::string_view(v);
    return std::nullopt;
}

bool parse_http_block(std::string_view block, int& status, HeaderList& headers, std::size_t& body_offset) {
    if (!block.starts_with("HTTP/")) return false;
    std::size_t eol = block.find('\n');
    if (eol == std::string_view::npos) return false;
    std::string_view status_line = block.substr(0, eol);
    std::size_t sp = status_line.find(' ');
    if (sp == std::string_view::npos) return false;
    std::string_view code = trim(status_line.substr(sp + 1)).substr(0, 3);
    int value = 0;
    auto [ptr, ec] = std::from_chars(code.data(), code.data() + code.size(), value);
    if (ec != std::errc{} || ptr != code.data() + code.size()) return false;

    std::size_t block_end = 0;
    std::size_t end = find_header_end(block, eol, block_end);
    if (end == std::string_view::npos) {
        // Headers without a body.
        block_end = end = block.size();
    }
    status = value;
    headers = parse_header_lines(block.substr(eol + 1, block_end - (eol + 1)));
    body_offset = end;
    return true;
}

WarcRecordStream::WarcRecordStream(ByteSource& source, RecordFilter filter)
    : gzip_(source), filter_(std::move(filter)), scratch_(1 << 16) {}

WarcRecordStream::Fill WarcRecordStream::fill_more() {
    if (eof_) return Fill::eof;
    for (;;) {
        GzipChunk c = gzip_.read(scratch_);
        if (c.after_gap) {
            // Whatever was in flight came from a damaged member.
            buf_.resize(pos_);
            confirmed_ = std::min(confirmed_, pos_);
            std::erase_if(member_marks_, [&](const auto& m) { return m.first >= pos_; });
        }
        if (c.size > 0) {
            if (c.member_start) member_marks_.emplace_back(buf_.size(), c.member_offset);
            else if (!c.after_gap) confirmed_ = buf_.size();
            buf_.append(reinterpret_cast<const char*>(scratch_.data()), c.size);
        }
        if (c.member_end) confirmed_ = buf_.size();
        if (c.end_of_stream) eof_ = true;
        if (c.after_gap) return Fill::gap;
        if (c.size > 0 || c.member_end) return Fill::ok;
        if (eof_) return Fill::eof;
    }
}

WarcRecordStream::Fill WarcRecordStream::ensure(std::size_t n) {
    while (buf_.size() - pos_ < n) {
        Fill f = fill_more();
        if (f != Fill::ok) return f;
    }
    return Fill::ok;
}

void WarcRecordStream::compact() {
    if (pos_ == 0) return;
    base_member_offset_ = member_offset_at(pos_);
    buf_.erase(0, pos_);
    confirmed_ = confirmed_ > pos_ ? confirmed_ - pos_ : 0;
    std::erase_if(member_marks_, [&](const auto& m) { return m.first <= pos_; });
    for (auto& m : member_marks_) m.first -= pos_;
    pos_ = 0;
}

std::uint64_t WarcRecordStream::member_offset_at(std::size_t pos) const {
    std::uint64_t offset = base_member_offset_;
    for (const auto& [p, off] : member_marks_) {
        if (p > pos) break;
        offset = off;
    }
    return offset;
}

void WarcRecordStream::sync_counters() {
    counters_.skipped_corrupt = framing_damage_ + gzip_.corrupt_regions();
    counters_.boundaries = framed_ + counters_.skipped_corrupt;
}

std::optional<RawWarcRecord> WarcRecordStream::next() {
    // Moves pos_ to the next line that begins with "WARC/", or to the end.
    auto skip_to_next_header = [this] {
        for (;;) {
            std::size_t hit = buf_.find("\nWARC/", pos_);
            if (hit != std::string::npos) {
                pos_ = hit + 1;
                return;
            }
            pos_ = std::max(pos_, buf_.size() > 5 ? buf_.size() - 5 : std::size_t{0});
            compact();
            if (fill_more() == Fill::eof) {
                pos_ = buf_.size();
                return;
            }
        }
    };

    for (;;) {
        compact();
        sync_counters();

        // Blank lines between records.
        Fill f = Fill::ok;
        while ((f = ensure(1)) == Fill::ok && (buf_[pos_] == '\r' || buf_[pos_] == '\n')) ++pos_;
        if (f == Fill::gap) continue;
        if (f == Fill::eof) {
            sync_counters();
            return std::nullopt;
        }

        f = ensure(5);
        if (f == Fill::gap) continue;
        if (f == Fill::eof || std::string_view(buf_).substr(pos_, 5) != "WARC/") {
            // Garbage between records: skip to the next line starting "WARC/".
            ++framing_damage_;
            skip_to_next_header();
            continue;
        }

        std::size_t header_block_end = 0;
        std::size_t header_end = std::string::npos;
        bool restart = false;
        for (;;) {
            header_end = find_header_end(buf_, pos_, header_block_end);
            if (header_end != std::string::npos) break;
            if (buf_.size() - pos_ > kMaxHeaderBlock) break;
            f = fill_more();
            if (f != Fill::ok) {
                restart = true;
                break;
            }
        }
        if (restart) {
            if (f == Fill::eof) {
                // Truncated header block at end of stream.
                ++framing_damage_;
                pos_ = buf_.size();
            }
            continue;
        }
        if (header_end == std::string::npos) {
            ++framing_damage_;
            skip_to_next_header();
            continue;
        }

        std::string_view header_view(buf_.data() + pos_, header_block_end - pos_);
        std::size_t first_eol = header_view.find('\n');
        HeaderList headers = parse_header_lines(header_view.substr(first_eol + 1));

        auto length_text = find_header(headers, "Content-Length");
        std::uint64_t length = 0;
        bool length_ok = false;
        if (length_text) {
            auto [ptr, ec] = std::from_chars(length_text->data(), length_text->data() + length_text->size(), length);
            length_ok = ec == std::errc{} && ptr == length_text->data() + length_text->size();
        }
        if (!length_ok) {
            ++framing_damage_;
            skip_to_next_header();
            continue;
        }

        const std::size_t record_start = pos_;
        const std::size_t payload_rel = header_end - pos_;
        f = ensure(payload_rel + length);
        if (f == Fill::gap) continue;
        if (f == Fill::eof) {
            // Content-Length runs past the end of the stream.
            ++framing_damage_;
            pos_ = buf_.size();
            continue;
        }
        const std::size_t record_end = record_start + payload_rel + length;

        // Hold the record until the member data it came from is known good.
        while (confirmed_ < record_end && !eof_) {
            f = fill_more();
            if (f != Fill::ok) break;
        }
        if (f == Fill::gap) continue;

        ++framed_;
        pos_ = record_end;
        RecordType type = record_type_from_header(find_header(headers, "WARC-Type").value_or(""));
        if (filter_ && !filter_->contains(type)) {
            ++counters_.filtered_out;
            sync_counters();
            continue;
        }

        RawWarcRecord rec;
        rec.record_type = type;
        rec.byte_offset = member_offset_at(record_start);
        if (auto uri = find_header(headers, "WARC-Target-URI"); uri && type != RecordType::warcinfo) {
            std::string_view u = *uri;
            if (u.size() >= 2 && u.front() == '<' && u.back() == '>') u = u.substr(1, u.size() - 2);
            rec.target_uri = u;
        }
        rec.payload.assign(buf_, record_start + payload_rel, length);
        rec.warc_headers = std::move(headers);

        int status = 0;
        HeaderList http_headers;
        std::size_t body_offset = 0;
        if ((type == RecordType::response || type == RecordType::request) &&
            parse_http_block(rec.payload, status, http_headers, body_offset)) {
            if (type == RecordType::response) rec.http_status = status;
            rec.http_headers = std::move(http_headers);
            rec.http_body_offset = body_offset;
            if (auto ct = find_header(rec.http_headers, "Content-Type")) rec.content_type = std::string(*ct);
        } else if (auto ct = find_header(rec.warc_headers, "Content-Type")) {
            rec.content_type = std::string(*ct);
        }

        ++counters_.yielded;
        sync_counters();
        return rec;
    }
}

}  // namespace warcpipe
