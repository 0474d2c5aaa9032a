#include "warcpipe/gzip_stream.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstring>

#include "warcpipe/errors.hpp"

namespace warcpipe {

namespace {
constexpr unsigned char kMagic0 = 0x1f;
constexpr unsigned char kMagic1 = 0x8b;
constexpr unsigned char kDeflate = 0x08;
}  // namespace

GzipStreamReader::GzipStreamReader(ByteSource& source, std::size_t buffer_size)
    : source_(source), in_(std::max<std::size_t>(buffer_size, 64)), z_(new z_stream{}) {
    // 16 + MAX_WBITS: gzip wrapper only, one member per reset.
    if (inflateInit2(z_, 16 + MAX_WBITS) != Z_OK) {
        delete z_;
        throw Error("zlib inflateInit2 failed");
    }
}

GzipStreamReader::~GzipStreamReader() {
    inflateEnd(z_);
    delete z_;
}

bool GzipStreamReader::fill() {
    if (source_eof_) return false;
    if (in_pos_ > 0) {
        std::memmove(in_.data(), in_.data() + in_pos_, in_len_ - in_pos_);
        in_len_ -= in_pos_;
        in_pos_ = 0;
    }
    if (in_len_ == in_.size()) return true;
    std::size_t n = source_.read(std::span(in_.data() + in_len_, in_.size() - in_len_));
    if (n == 0) {
        source_eof_ = true;
        return false;
    }
    in_len_ += n;
    return true;
}

void GzipStreamReader::mark_gap() {
    pending_gap_ = true;
    if (!in_gap_region_) {
        ++corrupt_regions_;
        in_gap_region_ = true;
    }
}

// Advances to the next plausible member header. Returns false at end of input.
bool GzipStreamReader::resync() {
    for (;;) {
        while (in_len_ - in_pos_ >= 3) {
            const unsigned char* p = in_.data() + in_pos_;
            if (p[0] == kMagic0 && p[1] == kMagic1 && p[2] == kDeflate) return true;
            ++in_pos_;
            ++consumed_;
        }
        if (!fill()) {
            consumed_ += in_len_ - in_pos_;
            in_pos_ = in_len_;
            return false;
        }
    }
}

GzipChunk GzipStreamReader::read(std::span<unsigned char> out) {
    GzipChunk chunk;
    for (;;) {
        if (!in_member_) {
            if (in_len_ - in_pos_ < 3) fill();
            if (in_pos_ == in_len_) {
                chunk.end_of_stream = true;
                chunk.after_gap = std::exchange(pending_gap_, false);
                return chunk;
            }
            const unsigned char* p = in_.data() + in_pos_;
            bool magic = in_len_ - in_pos_ >= 3 && p[0] == kMagic0 && p[1] == kMagic1 && p[2] == kDeflate;
            if (!magic) {
                bool all_zero = std::all_of(p, static_cast<const unsigned char*>(in_.data() + in_len_), [](unsigned char c) { return c == 0; });
                // Zero padding after the last member is tolerated silently.
                if (!(all_zero && source_eof_)) mark_gap();
                ++in_pos_;
                ++consumed_;
                if (!resync()) continue;
            }
            if (inflateReset(z_) != Z_OK) throw Error("zlib inflateReset failed");
            in_member_ = true;
            member_fresh_ = true;
            member_offset_ = consumed_;
        }

        if (in_pos_ == in_len_ && !fill()) {
            // Input ended inside a member.
            in_member_ = false;
            mark_gap();
            continue;
        }

        z_->next_in = in_.data() + in_pos_;
        z_->avail_in = static_cast<uInt>(in_len_ - in_pos_);
        z_->next_out = out.data();
        z_->avail_out = static_cast<uInt>(out.size());
        int ret = inflate(z_, Z_NO_FLUSH);
        std::size_t used = (in_len_ - in_pos_) - z_->avail_in;
        in_pos_ += used;
        consumed_ += used;
        std::size_t produced = out.size() - z_->avail_out;

        if (ret == Z_STREAM_END) {
            in_member_ = false;
            in_gap_region_ = false;
            ++members_completed_;
            chunk.size = produced;
            chunk.member_end = true;
        } else if (ret == Z_OK || ret == Z_BUF_ERROR) {
            if (produced == 0) {
                if (used == 0 && !fill()) {
                    in_member_ = false;
                    mark_gap();
                }
                continue;
            }
            chunk.size = produced;
        } else {
            // Z_DATA_ERROR, Z_NEED_DICT, Z_STREAM_ERROR: abandon this member.
            in_member_ = false;
            mark_gap();
            continue;
        }

        chunk.member_offset = member_offset_;
        chunk.member_start = std::exchange(member_fresh_, false);
        chunk.after_gap = std::exchange(pending_gap_, false);
        return chunk;
    }
}

}  // namespace warcpipe
