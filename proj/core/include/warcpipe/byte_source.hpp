#pragma once

#include <chrono>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace warcpipe {

// Pull-style byte stream shared by local files, in-memory buffers and
// downloaded segments.
class ByteSource {
  public:
    virtual ~ByteSource() = default;
    // Fills a prefix of `out`; returns 0 only at end of stream.
    virtual std::size_t read(std::span<unsigned char> out) = 0;
};

class FileSource final : public ByteSource {
  public:
    explicit FileSource(const std::filesystem::path& path);
    ~FileSource() override;
    FileSource(const FileSource&) = delete;
    FileSource& operator=(const FileSource&) = delete;

    std::size_t read(std::span<unsigned char> out) override;

  private:
    std::FILE* file_ = nullptr;
};

class MemorySource final : public ByteSource {
  public:
    explicit MemorySource(std::vector<unsigned char> data) : data_(std::move(data)) {}
    explicit MemorySource(std::string_view data) : data_(data.begin(), data.end()) {}

    std::size_t read(std::span<unsigned char> out) override;

  private:
    std::vector<unsigned char> data_;
    std::size_t pos_ = 0;
};

struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds initial_backoff{500};
};

// Environment variables consulted for remote segments:
//   WARCPIPE_CC_BASE_URL  replaces https://data.commoncrawl.org/ for s3:// refs
//   WARCPIPE_HTTP_USERPWD "user:password" for authenticated mirrors
//   WARCPIPE_HTTP_BEARER  bearer token sent as Authorization header
std::string resolve_remote_url(const std::string& location);

bool is_remote_location(const std::string& location);

// Opens a local path directly. Remote locations (http, https, ftp, file:// and
// s3://commoncrawl/) are downloaded to a temporary file with exponential
// backoff between attempts; the temporary file is removed when the returned
// source is destroyed. Throws FetchError once every attempt has failed.
std::unique_ptr<ByteSource> open_source(const std::string& location,
                                        const RetryPolicy& retry = {});

}  // namespace warcpipe
