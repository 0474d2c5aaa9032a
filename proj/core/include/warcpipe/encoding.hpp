#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace warcpipe {

struct CharsetHints {
    std::optional<std::string> http_header;  // charset parameter of Content-Type
    std::optional<std::string> meta_tag;     // <meta charset> / http-equiv
};

struct DecodedText {
    std::string text;           // always valid UTF-8
    std::string encoding_used;  // canonical label, e.g. "utf-8", "windows-1252"
    std::size_t replacements = 0;
    std::size_t characters = 0;

    double replacement_ratio() const {
        return characters == 0 ? 0.0 : static_cast<double>(replacements) / static_cast<double>(characters);
    }
    bool acceptable(double max_ratio = 0.05) const { return replacement_ratio() <= max_ratio; }
};

// Priority: byte-order mark, HTTP header, meta tag, statistical fallback over
// utf-8 / windows-1252 / iso-8859-1 / iso-8859-15. Undecodable sequences and C0/C1
// control characters other than TAB, LF, FF and CR become U+FFFD and count as
// replacements. A hint naming an unknown charset is ignored.
DecodedText decode_to_utf8(std::string_view body, const CharsetHints& hints = {});

// Decodes with one specific charset; nullopt if the label is unsupported.
std::optional<DecodedText> decode_as(std::string_view body, std::string_view charset);

// Canonical lower-case label for a charset name or alias; nullopt if unknown.
std::optional<std::string> canonical_charset(std::string_view label);

// "text/html; charset=ISO-8859-1" -> "ISO-8859-1"
std::optional<std::string> charset_from_content_type(std::string_view content_type);

// Looks for <meta charset=...> or <meta http-equiv content="...charset=...">
// within the first few kilobytes of the body.
std::optional<std::string> sniff_meta_charset(std::string_view body);

}  // namespace warcpipe
