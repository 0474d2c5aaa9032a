#include <cctype>

#include "warcpipe/corpus.hpp"
#include "warcpipe/errors.hpp"
#include "warcpipe/hash.hpp"

namespace warcpipe {

Uuid Uuid::v4_from_bits(std::uint64_t high, std::uint64_t low) {
    std::array<std::uint8_t, 16> b{};
    for (int i = 0; i < 8; ++i) {
        b[i] = static_cast<std::uint8_t>(high >> (56 - 8 * i));
        b[8 + i] = static_cast<std::uint8_t>(low >> (56 - 8 * i));
    }
    b[6] = static_cast<std::uint8_t>((b[6] & 0x0F) | 0x40);
    b[8] = static_cast<std::uint8_t>((b[8] & 0x3F) | 0x80);
    return Uuid(b);
}

std::string Uuid::to_string() const {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(36);
    for (int i = 0; i < 16; ++i) {
        if (i == 4 || i == 6 || i == 8 || i == 10) out.push_back('-');
        out.push_back(kHex[bytes_[i] >> 4]);
        out.push_back(kHex[bytes_[i] & 0xF]);
    }
    return out;
}

Uuid Uuid::parse(std::string_view text) {
    auto fail = [&](const char* what) { return ValidationError(std::string(what) + ": '" + std::string(text) + "'"); };
    if (text.size() != 36) throw fail("UUID must have 36 characters");
    auto nibble = [&](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        throw fail("non-hex UUID character");
    };
    std::array<std::uint8_t, 16> b{};
    std::size_t byte = 0;
    for (std::size_t i = 0; i < 36;) {
        if (i == 8 || i == 13 || i == 18 || i == 23) {
            if (text[i] != '-') throw fail("misplaced UUID separator");
            ++i;
            continue;
        }
        b[byte++] = static_cast<std::uint8_t>(nibble(text[i]) << 4 | nibble(text[i + 1]));
        i += 2;
    }
    return Uuid(b);
}

bool is_uuid_v4(std::string_view text) {
    try {
        Uuid u = Uuid::parse(text);
        return u.version() == 4 && u.rfc_variant();
    } catch (const ValidationError&) {
        return false;
    }
}

RandomIdSource::RandomIdSource() {
    std::random_device rd;
    std::seed_seq seq{rd(), rd(), rd(), rd(), rd(), rd(), rd(), rd()};
    rng_.seed(seq);
}

std::string RandomIdSource::next_id(const Document&, std::uint64_t) {
    std::uint64_t high = rng_();
    std::uint64_t low = rng_();
    return Uuid::v4_from_bits(high, low).to_string();
}

std::string DerivedIdSource::next_id(const Document& doc, std::uint64_t ordinal) {
    std::string material = doc.id;
    material.push_back('\0');
    material += doc.warc_url;
    material.push_back('\0');
    material += doc.url;
    material.push_back('\0');
    material += std::to_string(ordinal);
    Hash128 h = murmur3_128(material, seed_);
    return Uuid::v4_from_bits(h.high, h.low).to_string();
}

}  // namespace warcpipe
