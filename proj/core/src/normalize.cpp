#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "warcpipe/dedup.hpp"
#include "warcpipe/errors.hpp"

namespace warcpipe {

namespace {

const icu::Normalizer2& nfkc() {
    static const icu::Normalizer2* instance = [] {
        UErrorCode status = U_ZERO_ERROR;
        const icu::Normalizer2* n = icu::Normalizer2::getNFKCInstance(status);
        if (U_FAILURE(status)) throw Error("ICU NFKC normaliser unavailable");
        return n;
    }();
    return *instance;
}

constexpr std::uint32_t kStripMask = U_GC_P_MASK | U_GC_S_MASK | U_GC_ND_MASK;

constexpr std::size_t kPieceBytes = 1 << 16;

bool ascii_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

// End of the piece starting at `from`. Pieces end just before an ASCII
// whitespace byte that precedes an ASCII byte: no normalisation, case mapping
// or stripping rule looks across such a position.
std::size_t piece_end(std::string_view text, std::size_t from) {
    if (text.size() - from <= kPieceBytes) return text.size();
    for (std::size_t i = from + kPieceBytes; i < text.size(); ++i)
        if (ascii_space(text[i]) && (i + 1 == text.size() || static_cast<unsigned char>(text[i + 1]) < 0x80)) return i;
    return text.size();
}

class Collapser {
  public:
    explicit Collapser(std::string& out) : out_(out) {}

    void append(const icu::UnicodeString& piece) {
        icu::UnicodeString collapsed;
        for (int32_t i = 0; i < piece.length();) {
            UChar32 c = piece.char32At(i);
            i += U16_LENGTH(c);
            if (u_isUWhiteSpace(c)) {
                pending_space_ = started_;
                continue;
            }
            if (pending_space_) collapsed.append(static_cast<UChar>(' '));
            pending_space_ = false;
            started_ = true;
            collapsed.append(c);
        }
        collapsed.toUTF8String(out_);
    }

  private:
    std::string& out_;
    bool started_ = false;
    bool pending_space_ = false;
};

}  // namespace

std::string normalize_for_dedup(std::string_view text) {
    std::string out;
    Collapser collapser(out);
    for (std::size_t from = 0; from < text.size();) {
        std::size_t to = piece_end(text, from);
        UErrorCode status = U_ZERO_ERROR;
        icu::UnicodeString u = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data() + from, static_cast<int32_t>(to - from)));
        u = nfkc().normalize(u, status);
        u.toLower(icu::Locale::getRoot());

        icu::UnicodeString kept;
        for (int32_t i = 0; i < u.length();) {
            UChar32 c = u.char32At(i);
            i += U16_LENGTH(c);
            if (U_GET_GC_MASK(c) & kStripMask) continue;
            kept.append(c);
        }
        // Removing a character can leave a base letter next to a combining mark.
        kept = nfkc().normalize(kept, status);
        if (U_FAILURE(status)) throw Error("ICU normalisation failed");
        collapser.append(kept);
        from = to;
    }
    return out;
}

DedupKey DedupKey::of_normalized(std::string_view normalized) {
    return DedupKey{murmur3_128(normalized, 0x646c4846)};
}

}  // namespace warcpipe
