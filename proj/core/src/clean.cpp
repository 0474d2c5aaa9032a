#include <unicode/uchar.h>

#include "warcpipe/extract.hpp"
#include "warcpipe/utf8.hpp"

namespace warcpipe {

double alphabetic_ratio(std::string_view text) {
    std::size_t letters = 0;
    std::size_t visible = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        char32_t cp = utf8::next(text, pos);
        if (u_isUWhiteSpace(static_cast<UChar32>(cp))) continue;
        ++visible;
        if (u_isUAlphabetic(static_cast<UChar32>(cp))) ++letters;
    }
    return visible == 0 ? 0.0 : static_cast<double>(letters) / static_cast<double>(visible);
}

std::size_t count_words(std::string_view text) {
    std::size_t words = 0;
    bool in_word = false;
    std::size_t pos = 0;
    while (pos < text.size()) {
        char32_t cp = utf8::next(text, pos);
        bool space = u_isUWhiteSpace(static_cast<UChar32>(cp));
        if (!space && !in_word) ++words;
        in_word = !space;
    }
    return words;
}

std::optional<Document> clean_document(Document doc, const CleaningPolicy& policy) {
    std::erase_if(doc.paragraphs, [&](const Paragraph& p) {
        return count_words(p.text) < policy.min_words || alphabetic_ratio(p.text) < policy.min_alpha_ratio;
    });
    if (doc.paragraphs.empty()) return std::nullopt;
    reindex(doc);
    return doc;
}

}  // namespace warcpipe
