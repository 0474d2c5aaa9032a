#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace warcpipe {

struct HtmlPage {
    std::string url;
    std::optional<std::string> declared_charset;
    std::string body;
};

struct Paragraph {
    std::size_t index = 0;
    std::string text;

    friend bool operator==(const Paragraph&, const Paragraph&) = default;
};

// One web page as an ordered list of paragraphs. `id` is empty until the page
// has been written as a corpus record.
struct Document {
    std::string id;
    std::string url;
    std::string warc_url;
    std::vector<Paragraph> paragraphs;
    std::string encoding_used;

    std::string joined_text(char sep = '\n') const;

    friend bool operator==(const Document&, const Document&) = default;
};

// Re-numbers paragraph indices 0..n-1 in place.
void reindex(Document& doc);

// Scans decoded markup with a tag-tolerant state machine. Block elements
// (p, div, li, td, th, blockquote, h1-h6, pre, article, section and other
// structural containers, plus two consecutive <br>) delimit paragraphs; inline
// markup is flattened in place. Content of script, style, nav, header, footer,
// aside, form, noscript, menu, head and similar non-prose elements, comments
// and attribute values never reaches the output.
std::vector<Paragraph> extract_paragraphs(std::string_view decoded_markup);

// Decodes character references in a text run (named, decimal, hexadecimal).
std::string decode_entities(std::string_view text);

struct CleaningPolicy {
    std::size_t min_words = 3;
    double min_alpha_ratio = 0.5;
};

// Letters over non-whitespace code points; 0 for an all-whitespace string.
double alphabetic_ratio(std::string_view text);

std::size_t count_words(std::string_view text);

// Drops paragraphs that are too short or mostly non-alphabetic and re-indexes
// the survivors. nullopt when nothing survives.
std::optional<Document> clean_document(Document doc, const CleaningPolicy& policy = {});

}  // namespace warcpipe
