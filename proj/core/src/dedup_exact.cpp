#include "warcpipe/dedup.hpp"

namespace warcpipe {

bool ExactDocumentDeduper::admit(const Document& doc) {
    if (seen_.insert(DedupKey::of(doc.joined_text())).second) return true;
    ++removed_;
    return false;
}

std::optional<Document> ExactParagraphDeduper::filter(Document doc) {
    const std::size_t before = doc.paragraphs.size();
    std::erase_if(doc.paragraphs, [&](const Paragraph& p) { return !seen_.insert(DedupKey::of(p.text)).second; });
    paragraphs_removed_ += before - doc.paragraphs.size();
    if (doc.paragraphs.empty()) {
        ++documents_emptied_;
        return std::nullopt;
    }
    reindex(doc);
    return doc;
}

std::vector<Document> dedup_exact_documents(std::vector<Document> docs, ExactDedupStats* stats) {
    ExactDocumentDeduper dedup;
    std::vector<Document> out;
    out.reserve(docs.size());
    for (auto& d : docs)
        if (dedup.admit(d)) out.push_back(std::move(d));
    if (stats) stats->documents_removed += dedup.removed();
    return out;
}

std::vector<Document> dedup_exact_paragraphs(std::vector<Document> docs, ExactDedupStats* stats) {
    ExactParagraphDeduper dedup;
    std::vector<Document> out;
    out.reserve(docs.size());
    for (auto& d : docs)
        if (auto kept = dedup.filter(std::move(d))) out.push_back(std::move(*kept));
    if (stats) {
        stats->paragraphs_removed += dedup.paragraphs_removed();
        stats->documents_emptied += dedup.documents_emptied();
    }
    return out;
}

}  // namespace warcpipe
