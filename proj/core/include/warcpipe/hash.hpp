#pragma once

#include <cstdint>
#include <string_view>

namespace warcpipe {

struct Hash128 {
    std::uint64_t high = 0;
    std::uint64_t low = 0;

    friend bool operator==(const Hash128&, const Hash128&) = default;
};

// MurmurHash3 x64 128-bit; stable across platforms and runs.
Hash128 murmur3_128(std::string_view data, std::uint64_t seed = 0);

inline std::uint64_t murmur3_64(std::string_view data, std::uint64_t seed = 0) {
    return murmur3_128(data, seed).low;
}

// Finalisation mix from MurmurHash3. Bijective on 64-bit values.
constexpr std::uint64_t fmix64(std::uint64_t k) {
    k ^= k >> 33;
    k *= 0xff51afd7ed558ccdULL;
    k ^= k >> 33;
    k *= 0xc4ceb9fe1a85ec53ULL;
    k ^= k >> 33;
    return k;
}

constexpr std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct Hash128Hasher {
    std::size_t operator()(const Hash128& h) const noexcept {
        return static_cast<std::size_t>(h.low ^ (h.high * 0x9e3779b97f4a7c15ULL));
    }
};

}  // namespace warcpipe
