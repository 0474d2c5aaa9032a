#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace bench {

// Words of the shipped Spanish training text, in file order.
inline std::vector<std::string> spanish_words(std::size_t limit = 200000) {
    std::ifstream in(std::string(WARCPIPE_SOURCE_DIR) + "/data/langid/es.txt");
    std::vector<std::string> out;
    std::string w;
    while (out.size() < limit && in >> w) out.push_back(w);
    return out;
}

inline std::string spanish_text(std::size_t words, std::uint64_t seed = 1) {
    static const std::vector<std::string> vocab = spanish_words();
    std::mt19937_64 rng(seed);
    std::string out;
    for (std::size_t i = 0; i < words; ++i) {
        if (i) out += (i % 12 == 0) ? ". " : " ";
        out += vocab[rng() % vocab.size()];
    }
    return out + ".";
}

inline std::string html_page(std::size_t paragraphs, std::size_t words_per_paragraph, std::uint64_t seed = 1) {
    std::ostringstream out;
    out << "<!DOCTYPE html><html><head><meta charset=\"utf-8\"><title>Noticias</title>"
        << "<script>var x = 1;</script></head><body><nav><ul><li>Portada</li><li>Agenda</li></ul></nav><article>";
    for (std::size_t i = 0; i < paragraphs; ++i)
        out << "<p>" << spanish_text(words_per_paragraph, seed + i) << " <b>destacado</b> &amp; m&aacute;s</p>\n";
    out << "</article><footer>Aviso legal</footer></body></html>";
    return out.str();
}

}  // namespace bench
