#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "warcpipe/dedup.hpp"
#include "warcpipe/errors.hpp"

namespace warcpipe {

ShingleSet shingle(std::string_view normalized, std::size_t w) {
    if (w == 0) throw std::invalid_argument("shingle width must be >= 1");
    std::vector<std::string_view> words;
    std::size_t pos = 0;
    while (pos < normalized.size()) {
        while (pos < normalized.size() && normalized[pos] == ' ') ++pos;
        std::size_t end = normalized.find(' ', pos);
        if (end == std::string_view::npos) end = normalized.size();
        if (end > pos) words.push_back(normalized.substr(pos, end - pos));
        pos = end;
    }
    ShingleSet out;
    if (words.empty()) return out;
    if (words.size() < w) w = words.size();
    out.reserve(words.size() - w + 1);
    for (std::size_t i = 0; i + w <= words.size(); ++i) {
        std::string s(words[i]);
        for (std::size_t k = 1; k < w; ++k) {
            s.push_back(' ');
            s.append(words[i + k]);
        }
        out.push_back(std::move(s));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

HashedShingles hash_shingles(std::string_view normalized, std::size_t w, std::uint64_t seed) {
    if (w == 0) throw std::invalid_argument("shingle width must be >= 1");
    // Start offsets of the last w words; a window spans from the oldest start
    // to the end of the newest word, which keeps single separating spaces.
    std::vector<std::size_t> starts(w);
    std::size_t seen = 0;
    std::size_t last_end = 0;
    HashedShingles out;
    std::size_t pos = 0;
    while (pos < normalized.size()) {
        while (pos < normalized.size() && normalized[pos] == ' ') ++pos;
        if (pos >= normalized.size()) break;
        std::size_t end = normalized.find(' ', pos);
        if (end == std::string_view::npos) end = normalized.size();
        starts[seen % w] = pos;
        ++seen;
        last_end = end;
        if (seen >= w) {
            std::size_t first = starts[(seen - w) % w];
            out.push_back(murmur3_64(normalized.substr(first, end - first), seed));
        }
        pos = end;
    }
    if (seen > 0 && seen < w) out.push_back(murmur3_64(normalized.substr(starts[0], last_end - starts[0]), seed));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

template <typename Set>
double sorted_jaccard(const Set& a, const Set& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t inter = 0;
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i < *j) ++i;
        else if (*j < *i) ++j;
        else {
            ++inter;
            ++i;
            ++j;
        }
    }
    return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

double jaccard(const ShingleSet& a, const ShingleSet& b) { return sorted_jaccard(a, b); }

double jaccard(const HashedShingles& a, const HashedShingles& b) { return sorted_jaccard(a, b); }

void LshParams::validate() const {
    if (shingle_size == 0) throw ConfigError("shingle_size must be >= 1");
    if (num_perms == 0 || bands == 0 || rows == 0) throw ConfigError("num_perms, bands and rows must be >= 1");
    if (bands * rows != num_perms)
        throw ConfigError("bands x rows (" + std::to_string(bands) + " x " + std::to_string(rows) +
                          ") must equal num_perms (" + std::to_string(num_perms) + ")");
    if (!(jaccard_threshold > 0.0 && jaccard_threshold <= 1.0))
        throw ConfigError("jaccard_threshold must lie in (0, 1]");
}

double LshParams::candidate_probability(double j) const {
    return 1.0 - std::pow(1.0 - std::pow(j, static_cast<double>(rows)), static_cast<double>(bands));
}

MinHasher::MinHasher(std::size_t num_perms, std::uint64_t seed) : seed_(seed) {
    if (num_perms == 0) throw std::invalid_argument("num_perms must be >= 1");
    std::uint64_t state = seed;
    perm_seeds_.resize(num_perms);
    for (auto& s : perm_seeds_) s = splitmix64(state);
}

MinHashSignature MinHasher::signature(const ShingleSet& shingles) const {
    if (shingles.empty()) throw std::invalid_argument("minhash of an empty shingle set");
    MinHashSignature sig;
    sig.values.assign(perm_seeds_.size(), std::numeric_limits<std::uint64_t>::max());
    const std::size_t k = perm_seeds_.size();
    for (const auto& s : shingles) {
        const std::uint64_t base = murmur3_64(s, seed_);
        for (std::size_t i = 0; i < k; ++i) sig.values[i] = std::min(sig.values[i], fmix64(base ^ perm_seeds_[i]));
    }
    return sig;
}

MinHashSignature MinHasher::signature(const HashedShingles& hashes) const {
    if (hashes.empty()) throw std::invalid_argument("minhash of an empty shingle set");
    MinHashSignature sig;
    sig.values.assign(perm_seeds_.size(), std::numeric_limits<std::uint64_t>::max());
    const std::size_t k = perm_seeds_.size();
    for (std::uint64_t base : hashes)
        for (std::size_t i = 0; i < k; ++i) sig.values[i] = std::min(sig.values[i], fmix64(base ^ perm_seeds_[i]));
    return sig;
}

MinHashSignature minhash_signature(const ShingleSet& shingles, const LshParams& params, std::uint64_t seed) {
    return MinHasher(params.num_perms, seed).signature(shingles);
}

double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b) {
    if (a.values.size() != b.values.size() || a.values.empty())
        throw std::invalid_argument("signatures of different length");
    std::size_t agree = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) agree += a.values[i] == b.values[i];
    return static_cast<double>(agree) / static_cast<double>(a.values.size());
}

}  // namespace warcpipe
