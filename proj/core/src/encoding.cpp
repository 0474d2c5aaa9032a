#include "warcpipe/encoding.hpp"

#include <unicode/ucnv.h>
#include <unicode/ucnv_err.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <memory>
#include <vector>

#include "warcpipe/utf8.hpp"

namespace warcpipe {

namespace {

// windows-1252 0x80..0x9F; 0 marks an undefined byte.
constexpr std::array<char16_t, 32> kCp1252High = {
    0x20AC, 0,      0x201A, 0x0192, 0x201E, 0x2026, 0x2020, 0x2021, 0x02C6, 0x2030, 0x0160,
    0x2039, 0x0152, 0,      0x017D, 0,      0,      0x2018, 0x2019, 0x201C, 0x201D, 0x2022,
    0x2013, 0x2014, 0x02DC, 0x2122, 0x0161, 0x203A, 0x0153, 0,      0x017E, 0x0178};

std::string lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string_view trim_label(std::string_view s) {
    auto junk = [](char c) { return c == ' ' || c == '\t' || c == '"' || c == '\'' || c == '\r' || c == '\n'; };
    while (!s.empty() && junk(s.front())) s.remove_prefix(1);
    while (!s.empty() && junk(s.back())) s.remove_suffix(1);
    return s;
}

bool is_text_control(char32_t cp) {
    bool c0 = cp < 0x20 && cp != '\t' && cp != '\n' && cp != '\r' && cp != '\f';
    bool c1 = cp >= 0x7F && cp <= 0x9F;
    return c0 || c1;
}

class Sink {
  public:
    explicit Sink(std::size_t reserve) { out_.text.reserve(reserve); }
    void put(char32_t cp) {
        ++out_.characters;
        if (cp == utf8::kReplacement || is_text_control(cp)) {
            ++out_.replacements;
            cp = utf8::kReplacement;
        }
        utf8::append(out_.text, cp);
    }
    DecodedText finish(std::string label) {
        out_.encoding_used = std::move(label);
        return std::move(out_);
    }

  private:
    DecodedText out_;
};

DecodedText decode_utf8(std::string_view body) {
    if (body.starts_with("\xEF\xBB\xBF")) body.remove_prefix(3);
    Sink sink(body.size());
    std::size_t pos = 0;
    while (pos < body.size()) sink.put(utf8::next(body, pos));
    return sink.finish("utf-8");
}

DecodedText decode_single_byte(std::string_view body, std::string_view label) {
    Sink sink(body.size() + body.size() / 4);
    const bool cp1252 = label == "windows-1252";
    const bool latin9 = label == "iso-8859-15";
    for (unsigned char b : body) {
        char32_t cp = b;
        if (cp1252 && b >= 0x80 && b <= 0x9F) {
            cp = kCp1252High[b - 0x80];
            if (cp == 0) cp = utf8::kReplacement;
        } else if (latin9) {
            switch (b) {
                case 0xA4: cp = 0x20AC; break;
                case 0xA6: cp = 0x0160; break;
                case 0xA8: cp = 0x0161; break;
                case 0xB4: cp = 0x017D; break;
                case 0xB8: cp = 0x017E; break;
                case 0xBC: cp = 0x0152; break;
                case 0xBD: cp = 0x0153; break;
                case 0xBE: cp = 0x0178; break;
                default: break;
            }
        }
        sink.put(cp);
    }
    return sink.finish(std::string(label));
}

// Any other charset ICU knows about, via UTF-16.
std::optional<DecodedText> decode_with_icu(std::string_view body, const std::string& label) {
    UErrorCode status = U_ZERO_ERROR;
    std::unique_ptr<UConverter, decltype(&ucnv_close)> conv(ucnv_open(label.c_str(), &status), &ucnv_close);
    if (U_FAILURE(status)) return std::nullopt;
    ucnv_setToUCallBack(conv.get(), UCNV_TO_U_CALLBACK_SUBSTITUTE, nullptr, nullptr, nullptr, &status);

    std::vector<UChar> units(body.size() * 2 + 16);
    const char* src = body.data();
    const char* src_end = body.data() + body.size();
    UChar* dst = units.data();
    status = U_ZERO_ERROR;
    ucnv_toUnicode(conv.get(), &dst, units.data() + units.size(), &src, src_end, nullptr, true, &status);
    if (U_FAILURE(status)) return std::nullopt;

    Sink sink(body.size());
    for (const UChar* p = units.data(); p < dst; ++p) {
        char32_t cp = *p;
        if (cp >= 0xD800 && cp <= 0xDBFF && p + 1 < dst && p[1] >= 0xDC00 && p[1] <= 0xDFFF) {
            cp = 0x10000 + ((cp - 0xD800) << 10) + (p[1] - 0xDC00);
            ++p;
        } else if (cp == 0x1A) {
            cp = utf8::kReplacement;  // ICU substitution character
        }
        sink.put(cp);
    }
    return sink.finish(label);
}

// Byte-frequency plausibility for the single-byte candidates: letters and
// common Spanish punctuation score, controls and rarely-used symbols cost.
double plausibility(const DecodedText& d) {
    double score = 0;
    std::size_t pos = 0;
    const std::string& t = d.text;
    while (pos < t.size()) {
        char32_t cp = utf8::next(t, pos);
        if (cp < 0x80) continue;
        if (cp == utf8::kReplacement) score -= 4;
        else if ((cp >= 0xC0 && cp <= 0xFF && cp != 0xD7 && cp != 0xF7) || cp == 0xA1 || cp == 0xBF ||
                 cp == 0xAA || cp == 0xBA || cp == 0xAB || cp == 0xBB || cp == 0x20AC)
            score += 1;
        else if (cp == 0x2018 || cp == 0x2019 || cp == 0x201C || cp == 0x201D || cp == 0x2013 ||
                 cp == 0x2014 || cp == 0x2026 || cp == 0xA0 || cp == 0xA9 || cp == 0xB7 || cp == 0xB0)
            score += 0.5;
        else
            score -= 1;
    }
    return score;
}

DecodedText statistical_fallback(std::string_view body) {
    DecodedText as_utf8 = decode_utf8(body);
    if (as_utf8.replacements == 0) return as_utf8;

    DecodedText best = std::move(as_utf8);
    double best_score = plausibility(best);
    for (std::string_view label : {"windows-1252", "iso-8859-1", "iso-8859-15"}) {
        DecodedText candidate = decode_single_byte(body, label);
        double score = plausibility(candidate);
        // Fewer replacements first, then plausibility; ties keep the earlier label.
        if (candidate.replacements < best.replacements ||
            (candidate.replacements == best.replacements && score > best_score)) {
            best = std::move(candidate);
            best_score = score;
        }
    }
    return best;
}

}  // namespace

std::optional<std::string> canonical_charset(std::string_view label) {
    std::string l = lower_ascii(trim_label(label));
    if (l.empty()) return std::nullopt;
    if (l == "utf-8" || l == "utf8" || l == "unicode-1-1-utf-8") return "utf-8";
    if (l == "us-ascii" || l == "ascii" || l == "ansi_x3.4-1968") return "utf-8";
    if (l == "windows-1252" || l == "cp1252" || l == "x-cp1252") return "windows-1252";
    if (l == "iso-8859-1" || l == "iso8859-1" || l == "latin1" || l == "latin-1" || l == "l1" ||
        l == "iso_8859-1" || l == "8859-1")
        return "iso-8859-1";
    if (l == "iso-8859-15" || l == "iso8859-15" || l == "latin9" || l == "latin-9" || l == "iso_8859-15")
        return "iso-8859-15";
    UErrorCode status = U_ZERO_ERROR;
    const char* name = ucnv_getCanonicalName(l.c_str(), "IANA", &status);
    if (U_FAILURE(status) || name == nullptr) {
        status = U_ZERO_ERROR;
        UConverter* c = ucnv_open(l.c_str(), &status);
        if (U_FAILURE(status)) return std::nullopt;
        ucnv_close(c);
    }
    return l;
}

std::optional<DecodedText> decode_as(std::string_view body, std::string_view charset) {
    auto label = canonical_charset(charset);
    if (!label) return std::nullopt;
    if (*label == "utf-8") return decode_utf8(body);
    if (*label == "windows-1252" || *label == "iso-8859-1" || *label == "iso-8859-15")
        return decode_single_byte(body, *label);
    return decode_with_icu(body, *label);
}

std::optional<std::string> charset_from_content_type(std::string_view ct) {
    std::string lower = lower_ascii(ct);
    std::size_t at = lower.find("charset=");
    if (at == std::string::npos) return std::nullopt;
    std::string_view rest = std::string_view(ct).substr(at + 8);
    std::size_t end = rest.find_first_of(";, ");
    if (!rest.empty() && (rest.front() == '"' || rest.front() == '\'')) {
        char q = rest.front();
        rest.remove_prefix(1);
        end = rest.find(q);
    }
    std::string_view value = trim_label(rest.substr(0, end));
    if (value.empty()) return std::nullopt;
    return std::string(value);
}

std::optional<std::string> sniff_meta_charset(std::string_view body) {
    constexpr std::size_t kWindow = 4096;
    std::string head = lower_ascii(body.substr(0, kWindow));
    for (std::size_t at = head.find("<meta"); at != std::string::npos; at = head.find("<meta", at + 5)) {
        std::size_t close = head.find('>', at);
        std::string_view tag = std::string_view(head).substr(at, close == std::string::npos ? std::string::npos : close - at);
        std::size_t cs = tag.find("charset");
        if (cs == std::string_view::npos) continue;
        std::size_t p = cs + 7;
        while (p < tag.size() && (tag[p] == ' ' || tag[p] == '\t')) ++p;
        if (p >= tag.size() || tag[p] != '=') continue;
        ++p;
        while (p < tag.size() && (tag[p] == ' ' || tag[p] == '"' || tag[p] == '\'')) ++p;
        std::size_t end = p;
        while (end < tag.size() && tag[end] != '"' && tag[end] != '\'' && tag[end] != ';' && tag[end] != ' ' &&
               tag[end] != '/' && tag[end] != '>')
            ++end;
        if (end > p) return std::string(body.substr(at + p, end - p));
    }
    return std::nullopt;
}

DecodedText decode_to_utf8(std::string_view body, const CharsetHints& hints) {
    if (body.starts_with("\xEF\xBB\xBF")) return decode_utf8(body);
    if (body.starts_with("\xFF\xFE")) {
        if (auto d = decode_with_icu(body.substr(2), "utf-16le")) return *d;
    }
    if (body.starts_with("\xFE\xFF")) {
        if (auto d = decode_with_icu(body.substr(2), "utf-16be")) return *d;
    }
    for (const auto* hint : {&hints.http_header, &hints.meta_tag}) {
        if (!*hint) continue;
        if (auto d = decode_as(body, **hint)) return std::move(*d);
    }
    return statistical_fallback(body);
}

}  // namespace warcpipe
