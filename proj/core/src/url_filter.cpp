#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "warcpipe/corpus.hpp"
#include "warcpipe/errors.hpp"

namespace warcpipe {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool host_char(unsigned char c) { return std::isalnum(c) || c == '-' || c == '.' || c == '_' || c >= 0x80; }

}  // namespace

std::string url_host(std::string_view url) {
    std::size_t scheme = url.find("://");
    if (scheme == std::string_view::npos) return {};
    std::string_view rest = url.substr(scheme + 3);
    rest = rest.substr(0, rest.find_first_of("/?#"));
    if (std::size_t at = rest.rfind('@'); at != std::string_view::npos) rest.remove_prefix(at + 1);
    if (!rest.empty() && rest.front() == '[') {
        std::size_t close = rest.find(']');
        return lower(rest.substr(0, close == std::string_view::npos ? rest.size() : close + 1));
    }
    rest = rest.substr(0, rest.find(':'));
    std::string host = lower(rest);
    while (!host.empty() && host.back() == '.') host.pop_back();
    return host;
}

UrlRules::Pattern UrlRules::compile(std::string pattern) {
    std::string_view p = trim(pattern);
    if (p.empty()) throw ConfigError("empty URL pattern");
    if (p.find("://") != std::string_view::npos) {
        std::size_t scheme = p.find("://");
        if (scheme == 0 || p.size() == scheme + 3) throw ConfigError("malformed URL prefix pattern: '" + pattern + "'");
        for (char c : p)
            if (std::isspace(static_cast<unsigned char>(c))) throw ConfigError("whitespace in URL prefix: '" + pattern + "'");
        std::string value(p);
        // Scheme and host are case-insensitive; the path is not.
        std::size_t host_end = value.find_first_of("/?#", scheme + 3);
        std::transform(value.begin(), host_end == std::string::npos ? value.end() : value.begin() + host_end,
                       value.begin(), [](unsigned char c) { return std::tolower(c); });
        return {true, value};
    }
    if (p.front() == '.') p.remove_prefix(1);
    if (p.empty() || p.front() == '.' || p.back() == '.' || p.find("..") != std::string_view::npos)
        throw ConfigError("malformed host pattern: '" + pattern + "'");
    for (unsigned char c : p)
        if (!host_char(c)) throw ConfigError("malformed host pattern: '" + pattern + "'");
    return {false, lower(p)};
}

bool UrlRules::matches(const Pattern& p, std::string_view url, std::string_view host) {
    if (p.prefix) {
        if (url.size() < p.value.size()) return false;
        std::size_t scheme = p.value.find("://");
        std::size_t host_end = p.value.find_first_of("/?#", scheme + 3);
        if (host_end == std::string::npos) host_end = p.value.size();
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            char c = url[i];
            if (i < host_end) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            if (c != p.value[i]) return false;
        }
        return true;
    }
    if (host.size() < p.value.size()) return false;
    if (host.compare(host.size() - p.value.size(), p.value.size(), p.value) != 0) return false;
    return host.size() == p.value.size() || host[host.size() - p.value.size() - 1] == '.';
}

void UrlRules::deny(std::string pattern) { deny_.push_back(compile(std::move(pattern))); }
void UrlRules::allow(std::string pattern) { allow_.push_back(compile(std::move(pattern))); }

UrlRules UrlRules::parse(std::string_view text) {
    UrlRules rules;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view l = line;
        if (std::size_t hash = l.find('#'); hash != std::string_view::npos) l = l.substr(0, hash);
        l = trim(l);
        if (l.empty()) continue;
        std::size_t space = l.find_first_of(" \t");
        std::string_view word = l.substr(0, space);
        try {
            if (space != std::string_view::npos && (word == "allow" || word == "deny")) {
                std::string_view pattern = trim(l.substr(space));
                if (word == "allow")
                    rules.allow(std::string(pattern));
                else
                    rules.deny(std::string(pattern));
            } else if (space == std::string_view::npos) {
                rules.deny(std::string(l));
            } else {
                throw ConfigError("unexpected text after pattern");
            }
        } catch (const ConfigError& e) {
            throw ConfigError("URL rules line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return rules;
}

UrlRules UrlRules::from_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read URL rules file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

bool UrlRules::keep(std::string_view url) const {
    std::string host = url_host(url);
    for (const auto& p : deny_)
        if (matches(p, url, host)) return false;
    if (allow_.empty()) return true;
    for (const auto& p : allow_)
        if (matches(p, url, host)) return true;
    return false;
}

std::vector<CorpusRecord> filter_by_url(std::vector<CorpusRecord> records, const UrlRules& rules) {
    if (rules.empty()) return records;
    std::erase_if(records, [&](const CorpusRecord& r) { return !rules.keep(r.url); });
    return records;
}

}  // namespace warcpipe
