#pragma once

#include <cstdint>
#include <iterator>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "warcpipe/byte_source.hpp"
#include "warcpipe/gzip_stream.hpp"

namespace warcpipe {

// Identifies one WARC file in the Common Crawl bucket layout.
struct WarcSegmentRef {
    std::string crawl_id;    // CC-MAIN-2019-04
    std::string segment_id;  // 1547583730728.68
    std::string file_name;   // CC-MAIN-...-00091.warc.gz

    friend bool operator==(const WarcSegmentRef&, const WarcSegmentRef&) = default;
    friend auto operator<=>(const WarcSegmentRef&, const WarcSegmentRef&) = default;
};

// Throws ValidationError if any component is empty or malformed.
void validate(const WarcSegmentRef& ref);

// s3://commoncrawl/crawl-data/<crawl>/segments/<segment>/warc/<file>
std::string canonical_warc_url(const WarcSegmentRef& ref);

// Inverse of canonical_warc_url. Also accepts the bucket-relative form found in
// warc.paths listings ("crawl-data/CC-MAIN-.../warc/<file>").
WarcSegmentRef parse_warc_url(std::string_view url);

enum class RecordType { request, response, metadata, warcinfo, other };

std::string_view to_string(RecordType t);
RecordType record_type_from_header(std::string_view warc_type);

using HeaderList = std::vector<std::pair<std::string, std::string>>;

// Case-insensitive lookup; returns the first match.
std::optional<std::string_view> find_header(const HeaderList& headers, std::string_view name);

struct RawWarcRecord {
    RecordType record_type = RecordType::other;
    std::string target_uri;  // empty for warcinfo
    HeaderList warc_headers;
    std::optional<int> http_status;
    std::optional<std::string> content_type;  // from the HTTP header block
    std::string payload;                      // the full WARC block, Content-Length bytes
    std::uint64_t byte_offset = 0;            // compressed offset of the containing member

    // Offset within payload where the HTTP entity body begins, when the block is
    // an HTTP message. 0 otherwise.
    std::size_t http_body_offset = 0;
    HeaderList http_headers;

    std::string_view http_body() const {
        return std::string_view(payload).substr(http_body_offset);
    }
};

struct StreamCounters {
    std::uint64_t boundaries = 0;     // records framed plus damaged regions
    std::uint64_t yielded = 0;
    std::uint64_t filtered_out = 0;   // well-formed but not in the type filter
    std::uint64_t skipped_corrupt = 0;

    StreamCounters& operator+=(const StreamCounters& o) {
        boundaries += o.boundaries;
        yielded += o.yielded;
        filtered_out += o.filtered_out;
        skipped_corrupt += o.skipped_corrupt;
        return *this;
    }
};

using RecordFilter = std::optional<std::set<RecordType>>;

// Lazily frames WARC/1.x records out of a gzip byte stream. Holds at most one
// record (plus a read buffer) in memory at a time.
class WarcRecordStream {
  public:
    WarcRecordStream(ByteSource& source, RecordFilter filter = std::nullopt);

    std::optional<RawWarcRecord> next();

    const StreamCounters& counters() const { return counters_; }

    class iterator {
      public:
        using iterator_category = std::input_iterator_tag;
        using value_type = RawWarcRecord;
        using difference_type = std::ptrdiff_t;
        using pointer = const RawWarcRecord*;
        using reference = const RawWarcRecord&;

        iterator() = default;
        explicit iterator(WarcRecordStream* s) : stream_(s) { ++*this; }
        reference operator*() const { return *current_; }
        pointer operator->() const { return &*current_; }
        iterator& operator++() {
            current_ = stream_->next();
            if (!current_) stream_ = nullptr;
            return *this;
        }
        void operator++(int) { ++*this; }
        friend bool operator==(const iterator& a, const iterator& b) { return a.stream_ == b.stream_; }

      private:
        WarcRecordStream* stream_ = nullptr;
        std::optional<RawWarcRecord> current_;
    };

    iterator begin() { return iterator(this); }
    iterator end() { return {}; }

  private:
    enum class Fill { ok, eof, gap };

    Fill fill_more();
    Fill ensure(std::size_t n);
    void compact();
    std::uint64_t member_offset_at(std::size_t pos) const;
    void sync_counters();

    GzipStreamReader gzip_;
    RecordFilter filter_;
    StreamCounters counters_;
    std::uint64_t framed_ = 0;
    std::uint64_t framing_damage_ = 0;

    // Decompressed bytes; [0, pos_) already consumed. Bytes before confirmed_
    // come from member data that decoded without error.
    std::string buf_;
    std::size_t pos_ = 0;
    std::size_t confirmed_ = 0;
    bool eof_ = false;
    // (position in buf_, member offset) for each member start inside buf_.
    std::vector<std::pair<std::size_t, std::uint64_t>> member_marks_;
    std::uint64_t base_member_offset_ = 0;
    std::vector<unsigned char> scratch_;
};

// Parses the HTTP status line and headers at the start of a response block.
// Returns false when the block is not an HTTP message.
bool parse_http_block(std::string_view block, int& status, HeaderList& headers, std::size_t& body_offset);

}  // namespace warcpipe
