#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstring>

#include "warcpipe/errors.hpp"
#include "warcpipe/langid.hpp"

extern char** environ;

namespace warcpipe {

namespace {

bool write_all(int fd, std::string_view data) {
    while (!data.empty()) {
        ssize_t n = ::write(fd, data.data(), data.size());
        if (n < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        data.remove_prefix(static_cast<std::size_t>(n));
    }
    return true;
}

}  // namespace

ExternalDetector::ExternalDetector(std::string command, DetectionStage stage)
    : command_(std::move(command)), stage_(stage) {
    if (command_.empty()) throw ConfigError("external detector command is empty");
    // A dead child must surface as an error, not kill the process.
    ::signal(SIGPIPE, SIG_IGN);

    int in_pipe[2];
    int out_pipe[2];
    if (::pipe2(in_pipe, O_CLOEXEC) != 0 || ::pipe2(out_pipe, O_CLOEXEC) != 0)
        throw ConfigError(std::string("pipe: ") + std::strerror(errno));

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);

    const char* argv[] = {"/bin/sh", "-c", command_.c_str(), nullptr};
    pid_t pid = 0;
    int rc = posix_spawn(&pid, "/bin/sh", &actions, nullptr, const_cast<char**>(argv), environ);
    posix_spawn_file_actions_destroy(&actions);
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    if (rc != 0) {
        ::close(in_pipe[1]);
        ::close(out_pipe[0]);
        throw ConfigError("cannot start external detector: " + std::string(std::strerror(rc)));
    }
    pid_ = pid;
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];

    try {
        query("probe");
    } catch (const Error& e) {
        throw ConfigError("external detector '" + command_ + "' failed its probe: " + e.what());
    }
}

ExternalDetector::~ExternalDetector() {
    if (to_child_ >= 0) ::close(to_child_);
    if (from_child_ >= 0) ::close(from_child_);
    if (pid_ > 0) {
        int status = 0;
        ::waitpid(pid_, &status, 0);
    }
}

LanguageVerdict ExternalDetector::detect(std::string_view text) const {
    std::lock_guard lock(mutex_);
    return query(text);
}

LanguageVerdict ExternalDetector::query(std::string_view text) const {
    std::string line;
    line.reserve(text.size() + 1);
    for (char c : text) line.push_back(c == '\n' || c == '\r' || c == '\t' ? ' ' : c);
    line.push_back('\n');
    if (!write_all(to_child_, line)) throw Error("external detector closed its input");

    std::size_t eol;
    while ((eol = pending_.find('\n')) == std::string::npos) {
        char buf[4096];
        ssize_t n = ::read(from_child_, buf, sizeof buf);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) throw Error("external detector exited");
        pending_.append(buf, static_cast<std::size_t>(n));
    }
    std::string reply = pending_.substr(0, eol);
    pending_.erase(0, eol + 1);
    if (!reply.empty() && reply.back() == '\r') reply.pop_back();

    std::size_t tab = reply.find('\t');
    if (tab == std::string::npos || tab == 0) throw Error("malformed detector reply '" + reply + "'");
    double conf = 0;
    const char* begin = reply.data() + tab + 1;
    const char* end = reply.data() + reply.size();
    auto [p, ec] = std::from_chars(begin, end, conf);
    if (ec != std::errc{} || p != end || !std::isfinite(conf) || conf < 0 || conf > 1)
        throw Error("malformed detector confidence in '" + reply + "'");

    LanguageVerdict v;
    v.stage = stage_;
    v.lang = reply.substr(0, tab);
    v.confidence = v.lang == kUndetermined ? 0.0 : conf;
    return v;
}

}  // namespace warcpipe
