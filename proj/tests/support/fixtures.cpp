#include "fixtures.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <zlib.h>

#include <algorithm>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>
#include <stdexcept>

#include "warcpipe/dedup.hpp"

namespace fixtures {

namespace fs = std::filesystem;
using namespace warcpipe;

std::string gzip_member(std::string_view data, int level) {
    z_stream z{};
    if (deflateInit2(&z, level, Z_DEFLATED, 16 + MAX_WBITS, 8, Z_DEFAULT_STRATEGY) != Z_OK)
        throw std::runtime_error("deflateInit2 failed");
    std::string out(deflateBound(&z, data.size()) + 32, '\0');
    z.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    z.avail_in = static_cast<uInt>(data.size());
    z.next_out = reinterpret_cast<Bytef*>(out.data());
    z.avail_out = static_cast<uInt>(out.size());
    int rc = deflate(&z, Z_FINISH);
    deflateEnd(&z);
    if (rc != Z_STREAM_END) throw std::runtime_error("deflate failed");
    out.resize(z.total_out);
    return out;
}

std::string http_response(int status, std::string_view content_type, std::string_view body) {
    std::string reason = status == 200 ? "OK" : status == 404 ? "Not Found" : "Status";
    std::ostringstream out;
    out << "HTTP/1.1 " << status << ' ' << reason << "\r\n"
        << "Content-Type: " << content_type << "\r\n"
        << "Content-Length: " << body.size() << "\r\n"
        << "Server: fixture\r\n\r\n"
        << body;
    return out.str();
}

std::string warc_record(std::string_view type, std::string_view target_uri, std::string_view block,
                        std::uint64_t serial) {
    char id[64];
    std::snprintf(id, sizeof id, "<urn:uuid:00000000-0000-4000-8000-%012llx>", static_cast<unsigned long long>(serial));
    std::ostringstream out;
    out << "WARC/1.0\r\n"
        << "WARC-Type: " << type << "\r\n"
        << "WARC-Date: 2019-01-20T18:42:53Z\r\n"
        << "WARC-Record-ID: " << id << "\r\n";
    if (!target_uri.empty()) out << "WARC-Target-URI: " << target_uri << "\r\n";
    if (type == "response" || type == "request")
        out << "Content-Type: application/http; msgtype=" << type << "\r\n";
    out << "Content-Length: " << block.size() << "\r\n\r\n" << block << "\r\n\r\n";
    return out.str();
}

std::string warc_gz(const std::vector<std::string>& records) {
    std::string out;
    for (const auto& r : records) out += gzip_member(r);
    return out;
}

void write_file(const fs::path& path, std::string_view bytes) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<ReferenceRecord> reference_read(const fs::path& path) {
    gzFile f = gzopen(path.c_str(), "rb");
    if (!f) throw std::runtime_error("gzopen failed");
    std::string data;
    char buf[1 << 15];
    int n;
    while ((n = gzread(f, buf, sizeof buf)) > 0) data.append(buf, static_cast<std::size_t>(n));
    gzclose(f);

    std::vector<ReferenceRecord> out;
    std::size_t pos = 0;
    while (pos < data.size()) {
        if (data.compare(pos, 5, "WARC/") != 0) throw std::runtime_error("reference reader lost framing");
        std::size_t end = data.find("\r\n\r\n", pos);
        std::string head = data.substr(pos, end - pos);
        ReferenceRecord r;
        std::size_t length = 0;
        std::istringstream lines(head);
        std::string line;
        while (std::getline(lines, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.rfind("WARC-Type: ", 0) == 0) r.type = line.substr(11);
            if (line.rfind("WARC-Target-URI: ", 0) == 0) r.uri = line.substr(17);
            if (line.rfind("Content-Length: ", 0) == 0) length = std::stoul(line.substr(16));
        }
        r.block = data.substr(end + 4, length);
        out.push_back(std::move(r));
        pos = end + 4 + length + 4;
    }
    return out;
}

namespace {

const std::vector<std::string> kSpanish = {
    "La biblioteca municipal abrirá sus puertas también los domingos a partir del próximo mes de octubre.",
    "Los vecinos del barrio podrán consultar libros, revistas y periódicos sin necesidad de pedir cita previa.",
    "El alcalde explicó que la medida responde a una petición que las asociaciones vecinales hacían desde hace años.",
    "El río que atraviesa la ciudad ha recuperado su caudal gracias a las lluvias de las últimas semanas.",
    "Los pescadores de la zona celebran que las truchas hayan vuelto a remontar la corriente durante la primavera.",
    "Según los técnicos de medio ambiente, la calidad del agua es la mejor registrada en toda la década.",
    "Nuestra cooperativa elabora aceite de oliva virgen extra con aceitunas recogidas a mano en la sierra.",
    "Cada botella lleva una etiqueta con el nombre de la finca y la fecha exacta de la cosecha.",
    "Realizamos envíos a toda la península en un plazo máximo de cuarenta y ocho horas laborables.",
    "La orquesta juvenil ofrecerá un concierto gratuito en la plaza mayor el sábado por la noche.",
    "El programa incluye obras de compositores españoles del siglo diecinueve y algunas piezas de jazz.",
    "Los organizadores recomiendan llegar con antelación porque el año pasado se llenó todo el recinto.",
    "Para preparar una buena tortilla de patatas hace falta paciencia, aceite abundante y huevos frescos.",
    "Primero se fríen las patatas a fuego lento con la cebolla hasta que queden muy tiernas.",
    "Después se mezclan con el huevo batido y se cuaja la tortilla por ambos lados en la sartén.",
    "El ayuntamiento ha abierto el plazo de inscripción para los cursos de natación del verano.",
    "Las clases están pensadas para niños a partir de cuatro años y para adultos de cualquier edad.",
    "Las plazas son limitadas y se asignarán por riguroso orden de llegada en las oficinas municipales.",
};

const std::vector<std::string> kEnglish = {
    "The museum will extend its opening hours during the summer holidays to welcome more visitors.",
    "Tickets can be booked online and children under twelve enter free of charge on weekdays.",
    "Our bakery has been making sourdough bread with traditional methods for more than forty years.",
    "Every loaf is shaped by hand and baked in a wood fired oven early in the morning.",
    "The local football club announced that the new stadium will be ready before the next season.",
    "Supporters have been waiting for years and the first match is expected to sell out quickly.",
    "Researchers at the university have developed a cheaper way to recycle plastic bottles at home.",
    "The team hopes that the method can be used by small businesses within the next few years.",
};

std::string page(std::string_view title, const std::vector<std::string>& paragraphs, std::string_view meta = {}) {
    std::ostringstream out;
    out << "<!DOCTYPE html>\n<html><head>";
    if (!meta.empty()) out << "<meta charset=\"" << meta << "\">";
    out << "<title>" << title << "</title>"
        << "<style>body { font-family: serif; }</style>"
        << "<script>var tracking = \"<p>not prose</p>\";</script></head>\n<body>\n"
        << "<header><a href=\"/\">Inicio</a> | <a href=\"/contacto\">Contacto</a></header>\n"
        << "<nav><ul><li>Portada</li><li>Noticias</li><li>Agenda</li></ul></nav>\n"
        << "<!-- comentario: <p>oculto</p> -->\n<article>\n";
    for (const auto& p : paragraphs) out << "<p>" << p << "</p>\n";
    out << "</article>\n<aside>Publicidad</aside>\n"
        << "<footer>&copy; 2019 Todos los derechos reservados. Aviso legal. Cookies.</footer>\n"
        << "</body></html>\n";
    return out.str();
}

std::string to_latin1(std::string_view utf8) {
    std::string out;
    std::size_t pos = 0;
    while (pos < utf8.size()) {
        unsigned char c = static_cast<unsigned char>(utf8[pos]);
        if (c < 0x80) {
            out.push_back(static_cast<char>(c));
            ++pos;
        } else {
            unsigned cp = ((c & 0x1F) << 6) | (static_cast<unsigned char>(utf8[pos + 1]) & 0x3F);
            out.push_back(static_cast<char>(cp));
            pos += 2;
        }
    }
    return out;
}

}  // namespace

std::string spanish_page(int variant) {
    std::size_t n = kSpanish.size();
    std::size_t base = static_cast<std::size_t>(variant) * 3 % n;
    std::vector<std::string> paras{kSpanish[base], kSpanish[(base + 1) % n], kSpanish[(base + 2) % n]};
    // Inline markup inside one paragraph must not split it.
    std::string& p = paras[1];
    std::size_t space = p.find(' ');
    p = "<b>" + p.substr(0, space) + "</b>" + p.substr(space);
    return page("Noticias " + std::to_string(variant), paras);
}

std::string english_page(int variant) {
    std::size_t base = static_cast<std::size_t>(variant) * 2 % kEnglish.size();
    return page("News", {kEnglish[base], kEnglish[base + 1]});
}

std::string boilerplate_page(int variant) {
    std::ostringstream out;
    out << "<html><head><title>Menu " << variant << "</title></head><body>"
        << "<header><h1>Tienda online</h1></header>"
        << "<nav><ul><li><a href=\"/a\">Ofertas de la semana</a></li><li><a href=\"/b\">Envíos y devoluciones</a></li>"
        << "<li><a href=\"/c\">Preguntas frecuentes sobre pedidos</a></li></ul></nav>"
        << "<menu><li>Iniciar sesión en la cuenta</li></menu>"
        << "<form><label>Buscar productos en la tienda</label><input name=q></form>"
        << "<footer><p>Todos los derechos reservados por la empresa distribuidora.</p>"
        << "<p>Política de privacidad y aviso legal del sitio web.</p></footer>"
        << "</body></html>";
    return out.str();
}

std::string golden_file_name(int part) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "CC-MAIN-20190120184253-20190120210253-%05d.warc.gz", part);
    return buf;
}

GoldenSegment golden_segment() {
    GoldenSegment g;
    std::vector<std::string> records;
    std::uint64_t serial = 0;
    records.push_back(warc_record("warcinfo", "", "software: fixture\r\nformat: WARC File Format 1.0\r\n", serial++));

    auto add_page = [&](const std::string& url, const std::string& html, std::string_view content_type,
                        bool with_request) {
        if (with_request) {
            std::string req = "GET / HTTP/1.1\r\nHost: " + url.substr(7, url.find('/', 7) - 7) + "\r\n\r\n";
            records.push_back(warc_record("request", url, req, serial++));
        }
        records.push_back(warc_record("response", url, http_response(200, content_type, html), serial++));
    };

    for (int i = 0; i < 6; ++i) {
        std::string url = "http://noticias" + std::to_string(i) + ".example.es/articulo.html";
        g.spanish_urls.push_back(url);
        if (i == 1) {
            // Latin-1 body declared only by the meta tag.
            std::string html = spanish_page(i);
            html.replace(html.find("<head>") + 6, 0, "<meta charset=\"iso-8859-1\">");
            add_page(url, to_latin1(html), "text/html", true);
        } else {
            add_page(url, spanish_page(i), "text/html; charset=utf-8", i == 3);
        }
        if (i == 2) {
            records.push_back(warc_record("metadata", url, "fetchTimeMs: 112\r\n", serial++));
        }
        if (i < 4) add_page("http://news" + std::to_string(i) + ".example.com/story", english_page(i), "text/html", false);
    }
    add_page("http://tienda.example.es/", boilerplate_page(0), "text/html; charset=UTF-8", false);
    add_page("http://tienda.example.es/ofertas", boilerplate_page(1), "text/html", false);
    records.push_back(warc_record("response", "http://noticias9.example.es/missing",
                                  http_response(404, "text/html", spanish_page(7)), serial++));
    records.push_back(warc_record("response", "http://noticias0.example.es/logo.png",
                                  http_response(200, "image/png", std::string("\x89PNG\r\n\x1a\n", 8) + "binary"),
                                  serial++));
    g.bytes = warc_gz(records);
    return g;
}

std::vector<ManifestEntry> write_mirror(const fs::path& root, const std::vector<MirrorSegment>& segments,
                                        const std::string& crawl, const std::string& segment_id) {
    std::vector<ManifestEntry> out;
    for (const auto& s : segments) {
        WarcSegmentRef ref{crawl, segment_id, s.file_name};
        fs::path path = root / "crawl-data" / crawl / "segments" / segment_id / "warc" / s.file_name;
        write_file(path, s.bytes);
        out.push_back({ref, path.string()});
    }
    return out;
}

std::string mixed_segment(int k) {
    std::vector<std::string> records;
    std::uint64_t serial = 0;
    auto add = [&](const std::string& url, const std::string& html) {
        records.push_back(warc_record("response", url, http_response(200, "text/html; charset=utf-8", html), serial++));
    };
    std::string host = "http://seg" + std::to_string(k) + ".example.es/";
    add(host + "a", spanish_page(k % 6));
    add(host + "b", spanish_page((k + 1) % 6));
    add(host + "en", english_page(k % 4));
    add(host + "menu", boilerplate_page(k));
    return warc_gz(records);
}

namespace {

std::vector<std::string> vocabulary(const std::string& lang) {
    std::ifstream in(source_dir() / "data" / "langid" / (lang + ".txt"));
    if (!in) throw std::runtime_error("missing training text for " + lang);
    std::set<std::string> words;
    std::string w;
    while (in >> w && words.size() < 20000) words.insert(w);
    return {words.begin(), words.end()};
}

std::string word_salad(std::mt19937_64& rng, const std::vector<std::string>& vocab, std::size_t words) {
    std::string out;
    std::size_t sentence = 0;
    for (std::size_t i = 0; i < words; ++i) {
        std::string w = vocab[rng() % vocab.size()];
        if (sentence == 0 && !w.empty() && w[0] >= 'a' && w[0] <= 'z') w[0] = static_cast<char>(w[0] - 'a' + 'A');
        if (!out.empty()) out += ' ';
        out += w;
        if (++sentence >= 8 + rng() % 8 || i + 1 == words) {
            out += '.';
            sentence = 0;
        }
    }
    return out;
}

std::string salad_page(std::mt19937_64& rng, const std::vector<std::string>& vocab, std::size_t paragraphs) {
    std::vector<std::string> paras;
    for (std::size_t i = 0; i < paragraphs; ++i) paras.push_back(word_salad(rng, vocab, 20 + rng() % 40));
    return page("Portada", paras);
}

}  // namespace

std::size_t write_large_segment(const fs::path& path, std::uint64_t min_bytes, std::uint64_t seed,
                                std::size_t large_page_bytes) {
    static const std::vector<std::string> es = vocabulary("es");
    static const std::vector<std::string> en = vocabulary("en");
    std::mt19937_64 rng(seed);
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    std::uint64_t written = 0;
    std::uint64_t serial = 0;
    std::size_t responses = 0;
    auto emit = [&](const std::string& url, const std::string& html) {
        std::string member =
            gzip_member(warc_record("response", url, http_response(200, "text/html; charset=utf-8", html), serial++), 1);
        out.write(member.data(), static_cast<std::streamsize>(member.size()));
        written += member.size();
        ++responses;
    };
    std::string host = "http://s" + std::to_string(seed) + ".example.es/";
    std::string info = gzip_member(warc_record("warcinfo", "", "software: fixture\r\n", serial++), 1);
    out.write(info.data(), static_cast<std::streamsize>(info.size()));
    written += info.size();
    while (written < min_bytes) {
        if (large_page_bytes > 0 && responses == 10) {
            std::vector<std::string> paras;
            std::size_t size = 0;
            while (size < large_page_bytes) {
                paras.push_back(word_salad(rng, es, 200));
                size += paras.back().size() + 8;
            }
            emit(host + "grande", page("Grande", paras));
            continue;
        }
        std::uint64_t kind = rng() % 20;
        std::string url = host + "p" + std::to_string(serial);
        if (kind < 16)
            emit(url, salad_page(rng, es, 10 + rng() % 20));
        else if (kind < 19)
            emit(url, salad_page(rng, en, 10 + rng() % 20));
        else
            emit(url, boilerplate_page(static_cast<int>(serial)));
    }
    if (!out) throw std::runtime_error("write failed on " + path.string());
    return responses;
}

std::string random_word(std::mt19937_64& rng) {
    static constexpr char kLetters[] = "abcdefghijklmnopqrstuvwxyz";
    std::size_t len = 3 + rng() % 8;
    std::string w;
    for (std::size_t i = 0; i < len; ++i) w.push_back(kLetters[rng() % 26]);
    return w;
}

std::vector<std::string> random_words(std::mt19937_64& rng, std::size_t n) {
    std::vector<std::string> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(random_word(rng));
    return out;
}

std::string join(const std::vector<std::string>& words, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i) out += sep;
        out += words[i];
    }
    return out;
}

Document make_doc(std::string id, std::vector<std::string> paragraphs, std::string url) {
    Document d;
    d.id = std::move(id);
    d.url = std::move(url);
    d.warc_url = "s3://commoncrawl/crawl-data/CC-MAIN-2019-04/segments/1547583730728.68/warc/" + golden_file_name();
    for (auto& p : paragraphs) d.paragraphs.push_back({d.paragraphs.size(), std::move(p)});
    return d;
}

std::vector<std::size_t> oracle_exact_documents(const std::vector<Document>& docs) {
    std::vector<std::string> norm;
    for (const auto& d : docs) norm.push_back(normalize_for_dedup(d.joined_text('\n')));
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        bool dup = false;
        for (std::size_t j = 0; j < i && !dup; ++j) dup = norm[j] == norm[i];
        if (!dup) kept.push_back(i);
    }
    return kept;
}

std::vector<Document> oracle_exact_paragraphs(const std::vector<Document>& docs) {
    std::vector<std::string> seen;
    std::vector<Document> out;
    for (const auto& d : docs) {
        Document copy = d;
        copy.paragraphs.clear();
        for (const auto& p : d.paragraphs) {
            std::string n = normalize_for_dedup(p.text);
            if (std::find(seen.begin(), seen.end(), n) != seen.end()) continue;
            seen.push_back(n);
            copy.paragraphs.push_back({copy.paragraphs.size(), p.text});
        }
        if (!copy.paragraphs.empty()) out.push_back(std::move(copy));
    }
    return out;
}

std::string oracle_normalize(std::string_view text) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* nfkc = icu::Normalizer2::getNFKCInstance(status);
    icu::UnicodeString u = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
    u = nfkc->normalize(u, status);
    u.toLower(icu::Locale::getRoot());
    icu::UnicodeString kept;
    for (int32_t i = 0; i < u.length();) {
        UChar32 c = u.char32At(i);
        i += U16_LENGTH(c);
        if (!(U_GET_GC_MASK(c) & (U_GC_P_MASK | U_GC_S_MASK | U_GC_ND_MASK))) kept.append(c);
    }
    kept = nfkc->normalize(kept, status);
    if (U_FAILURE(status)) throw std::runtime_error("ICU failure in oracle_normalize");
    icu::UnicodeString collapsed;
    bool pending = false;
    for (int32_t i = 0; i < kept.length();) {
        UChar32 c = kept.char32At(i);
        i += U16_LENGTH(c);
        if (u_isUWhiteSpace(c)) {
            pending = !collapsed.isEmpty();
            continue;
        }
        if (pending) collapsed.append(static_cast<UChar>(' '));
        pending = false;
        collapsed.append(c);
    }
    std::string out;
    collapsed.toUTF8String(out);
    return out;
}

std::vector<std::string> oracle_shingles(std::string_view normalized, std::size_t w) {
    std::vector<std::string> words;
    std::istringstream in{std::string(normalized)};
    std::string word;
    while (in >> word) words.push_back(word);
    std::set<std::string> s;
    if (words.empty()) return {};
    if (words.size() < w) return {join(words)};
    for (std::size_t i = 0; i + w <= words.size(); ++i)
        s.insert(join(std::vector<std::string>(words.begin() + static_cast<long>(i),
                                               words.begin() + static_cast<long>(i + w))));
    return {s.begin(), s.end()};
}

double oracle_jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::size_t inter = 0;
    for (const auto& x : sa) inter += sb.count(x);
    std::size_t uni = sa.size() + sb.size() - inter;
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

CorpusStats oracle_stats(const std::vector<std::string>& texts) {
    static const std::regex word(R"(\S+)");
    static const std::regex sentence("(?:[.?!]|\xE2\x80\xA6)+(?=\\s|$)");
    CorpusStats s;
    for (const auto& t : texts) {
        ++s.documents;
        ++s.lines;
        std::istringstream in(t);
        std::string para;
        while (std::getline(in, para, '\n')) {
            ++s.paragraphs;
            s.words += static_cast<std::uint64_t>(std::distance(std::sregex_iterator(para.begin(), para.end(), word),
                                                                std::sregex_iterator()));
            s.sentences += static_cast<std::uint64_t>(
                std::distance(std::sregex_iterator(para.begin(), para.end(), sentence), std::sregex_iterator()));
        }
        if (!t.empty() && t.back() == '\n') ++s.paragraphs;
    }
    return s;
}

fs::path source_dir() { return WARCPIPE_SOURCE_DIR; }
fs::path model_dir() { return source_dir() / "models"; }

fs::path temp_dir(std::string_view tag) {
    static std::mt19937_64 rng(std::random_device{}());
    fs::path p = fs::temp_directory_path() / ("warcpipe-" + std::string(tag) + "-" + std::to_string(rng() % 1000000000));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

PipelineConfig test_config() {
    PipelineConfig c = default_config();
    c.lang_model_dir = model_dir();
    c.chunk_bytes = kMinChunkBytes;
    c.retry.attempts = 1;
    c.retry.initial_backoff = std::chrono::milliseconds(0);
    return c;
}

}  // namespace fixtures
