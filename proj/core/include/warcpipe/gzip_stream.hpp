#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "warcpipe/byte_source.hpp"

struct z_stream_s;

namespace warcpipe {

struct GzipChunk {
    std::size_t size = 0;
    // Output produced before this chunk was lost to a corrupt or truncated
    // member; the chunk (if non-empty) starts a fresh member.
    bool after_gap = false;
    // First byte of this chunk is the first byte of a gzip member.
    bool member_start = false;
    // The member finished cleanly (trailer CRC and length verified) with this chunk.
    bool member_end = false;
    bool end_of_stream = false;
    // Compressed offset of the member the chunk belongs to.
    std::uint64_t member_offset = 0;
};

// Decompresses a concatenation of gzip members (RFC 1952) incrementally.
// A member that fails to inflate is abandoned and the reader resynchronises on
// the next gzip magic; the loss is reported once per damaged region through
// GzipChunk::after_gap and corrupt_regions().
class GzipStreamReader {
  public:
    explicit GzipStreamReader(ByteSource& source, std::size_t buffer_size = 1 << 16);
    ~GzipStreamReader();
    GzipStreamReader(const GzipStreamReader&) = delete;
    GzipStreamReader& operator=(const GzipStreamReader&) = delete;

    // Never returns bytes from two different members in one chunk. A chunk may be
    // empty when it only carries member_end or end_of_stream.
    GzipChunk read(std::span<unsigned char> out);

    std::uint64_t corrupt_regions() const { return corrupt_regions_; }
    std::uint64_t members_completed() const { return members_completed_; }
    std::uint64_t compressed_bytes_consumed() const { return consumed_; }

  private:
    bool fill();
    bool resync();
    void mark_gap();

    ByteSource& source_;
    std::vector<unsigned char> in_;
    std::size_t in_pos_ = 0;
    std::size_t in_len_ = 0;
    bool source_eof_ = false;

    z_stream_s* z_ = nullptr;
    bool in_member_ = false;
    bool member_fresh_ = false;
    bool pending_gap_ = false;
    bool in_gap_region_ = false;
    std::uint64_t consumed_ = 0;  // compressed offset of in_[in_pos_]
    std::uint64_t member_offset_ = 0;
    std::uint64_t corrupt_regions_ = 0;
    std::uint64_t members_completed_ = 0;
};

}  // namespace warcpipe
