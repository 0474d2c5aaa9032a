#include "warcpipe/byte_source.hpp"

#include <curl/curl.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <cstring>
#include <mutex>
#include <random>
#include <thread>

#include "warcpipe/errors.hpp"

namespace warcpipe {

FileSource::FileSource(const std::filesystem::path& path) {
    file_ = std::fopen(path.c_str(), "rb");
    if (!file_) throw IoError("cannot open " + path.string() + ": " + std::strerror(errno));
}

FileSource::~FileSource() {
    if (file_) std::fclose(file_);
}

std::size_t FileSource::read(std::span<unsigned char> out) {
    std::size_t n = std::fread(out.data(), 1, out.size(), file_);
    if (n == 0 && std::ferror(file_)) throw IoError("read error");
    return n;
}

std::size_t MemorySource::read(std::span<unsigned char> out) {
    std::size_t n = std::min(out.size(), data_.size() - pos_);
    std::memcpy(out.data(), data_.data() + pos_, n);
    pos_ += n;
    return n;
}

namespace {

constexpr std::string_view kS3Prefix = "s3://commoncrawl/";
constexpr std::string_view kDefaultBase = "https://data.commoncrawl.org/";

bool starts_with_any(const std::string& s, std::initializer_list<std::string_view> prefixes) {
    return std::any_of(prefixes.begin(), prefixes.end(),
                       [&](std::string_view p) { return s.starts_with(p); });
}

// Deletes the downloaded copy once the stream is done with it.
class TempFileSource final : public ByteSource {
  public:
    explicit TempFileSource(std::filesystem::path path) : path_(std::move(path)), file_(path_) {}
    ~TempFileSource() override {
        std::error_code ec;
        std::filesystem::remove(path_, ec);
    }
    std::size_t read(std::span<unsigned char> out) override { return file_.read(out); }

  private:
    std::filesystem::path path_;
    FileSource file_;
};

size_t write_to_file(char* ptr, size_t size, size_t nmemb, void* userdata) {
    return std::fwrite(ptr, size, nmemb, static_cast<std::FILE*>(userdata));
}

void curl_global_once() {
    static std::once_flag flag;
    std::call_once(flag, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
}

// One download attempt; returns an empty string on success, else the reason.
std::string download_once(const std::string& url, const std::filesystem::path& dest) {
    std::FILE* out = std::fopen(dest.c_str(), "wb");
    if (!out) return "cannot create " + dest.string();

    CURL* curl = curl_easy_init();
    if (!curl) {
        std::fclose(out);
        return "curl_easy_init failed";
    }
    curl_easy_setopt(curl, CURLOPT_URL, url.c_str());
    curl_easy_setopt(curl, CURLOPT_WRITEFUNCTION, write_to_file);
    curl_easy_setopt(curl, CURLOPT_WRITEDATA, out);
    curl_easy_setopt(curl, CURLOPT_FOLLOWLOCATION, 1L);
    curl_easy_setopt(curl, CURLOPT_FAILONERROR, 1L);
    curl_easy_setopt(curl, CURLOPT_CONNECTTIMEOUT, 30L);
    curl_easy_setopt(curl, CURLOPT_LOW_SPEED_LIMIT, 1024L);
    curl_easy_setopt(curl, CURLOPT_LOW_SPEED_TIME, 60L);
    curl_easy_setopt(curl, CURLOPT_USERAGENT, "warcpipe/0.3");

    struct curl_slist* headers = nullptr;
    if (const char* bearer = std::getenv("WARCPIPE_HTTP_BEARER")) {
        std::string h = std::string("Authorization: Bearer ") + bearer;
        headers = curl_slist_append(headers, h.c_str());
        curl_easy_setopt(curl, CURLOPT_HTTPHEADER, headers);
    }
    if (const char* userpwd = std::getenv("WARCPIPE_HTTP_USERPWD")) {
        curl_easy_setopt(curl, CURLOPT_USERPWD, userpwd);
    }

    CURLcode rc = curl_easy_perform(curl);
    curl_slist_free_all(headers);
    curl_easy_cleanup(curl);
    bool closed = std::fclose(out) == 0;
    if (rc != CURLE_OK) return curl_easy_strerror(rc);
    if (!closed) return "write failed for " + dest.string();
    return {};
}

std::filesystem::path temp_download_path() {
    static std::atomic<unsigned> counter{0};
    std::random_device rd;
    auto name = "warcpipe-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" +
                std::to_string(rd()) + ".warc.gz";
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

bool is_remote_location(const std::string& location) {
    return starts_with_any(location, {"http://", "https://", "ftp://", "file://", kS3Prefix});
}

std::string resolve_remote_url(const std::string& location) {
    if (!location.starts_with(kS3Prefix)) return location;
    std::string base(kDefaultBase);
    if (const char* env = std::getenv("WARCPIPE_CC_BASE_URL"); env && *env) {
        base = env;
        if (!base.ends_with('/')) base.push_back('/');
    }
    return base + location.substr(kS3Prefix.size());
}

std::unique_ptr<ByteSource> open_source(const std::string& location, const RetryPolicy& retry) {
    if (!is_remote_location(location)) return std::make_unique<FileSource>(location);

    curl_global_once();
    const std::string url = resolve_remote_url(location);
    const auto dest = temp_download_path();
    auto backoff = retry.initial_backoff;
    std::string last_error;
    for (int attempt = 1; attempt <= std::max(1, retry.attempts); ++attempt) {
        last_error = download_once(url, dest);
        if (last_error.empty()) return std::make_unique<TempFileSource>(dest);
        if (attempt < retry.attempts) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }
    std::error_code ec;
    std::filesystem::remove(dest, ec);
    throw FetchError("fetch failed after " + std::to_string(std::max(1, retry.attempts)) +
                     " attempts: " + url + ": " + last_error);
}

}  // namespace warcpipe
