#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "warcpipe/encoding.hpp"
#include "warcpipe/extract.hpp"
#include "warcpipe/utf8.hpp"

using namespace warcpipe;

namespace {

std::vector<std::string> texts(const std::vector<Paragraph>& ps) {
    std::vector<std::string> out;
    for (const auto& p : ps) out.push_back(p.text);
    return out;
}

}  // namespace

TEST(Decode, Utf8BomIsStripped) {
    DecodedText d = decode_to_utf8("\xEF\xBB\xBFHola");
    EXPECT_EQ(d.text, "Hola");
    EXPECT_EQ(d.encoding_used, "utf-8");
    EXPECT_EQ(d.replacements, 0u);
}

TEST(Decode, Latin1ByMetaTag) {
    std::string body = "<meta charset=\"iso-8859-1\"><p>Espa\xF1" "a</p>";
    CharsetHints hints;
    hints.meta_tag = sniff_meta_charset(body);
    ASSERT_EQ(hints.meta_tag, "iso-8859-1");
    DecodedText d = decode_to_utf8(body, hints);
    EXPECT_EQ(d.encoding_used, "iso-8859-1");
    EXPECT_NE(d.text.find("Espa\xC3\xB1" "a"), std::string::npos);
}

TEST(Decode, HintPriorityBomThenHeaderThenMeta) {
    std::string latin = "<meta charset=\"utf-8\">ni\xF1o";
    CharsetHints hints;
    hints.http_header = "windows-1252";
    hints.meta_tag = "utf-8";
    EXPECT_EQ(decode_to_utf8(latin, hints).encoding_used, "windows-1252");
    EXPECT_EQ(decode_to_utf8("\xEF\xBB\xBFni\xC3\xB1o", hints).encoding_used, "utf-8");
    hints.http_header = "no-such-charset";
    EXPECT_EQ(decode_to_utf8("ni\xC3\xB1o", hints).encoding_used, "utf-8");
}

TEST(Decode, HeaderAndMetaParsing) {
    EXPECT_EQ(charset_from_content_type("text/html; charset=ISO-8859-1"), "ISO-8859-1");
    EXPECT_EQ(charset_from_content_type("text/html;charset=\"utf-8\""), "utf-8");
    EXPECT_FALSE(charset_from_content_type("text/html"));
    EXPECT_EQ(sniff_meta_charset("<meta http-equiv=\"Content-Type\" content=\"text/html; charset=windows-1252\">"),
              "windows-1252");
    EXPECT_EQ(canonical_charset("latin1"), "iso-8859-1");
    EXPECT_EQ(canonical_charset("UTF8"), "utf-8");
}

TEST(Decode, StatisticalFallbackPrefersValidUtf8ThenSingleByte) {
    EXPECT_EQ(decode_to_utf8("canci\xC3\xB3n").encoding_used, "utf-8");
    DecodedText d = decode_to_utf8("canci\xF3n \x93" "comillas\x94");
    EXPECT_EQ(d.encoding_used, "windows-1252");
    EXPECT_EQ(d.text, "canci\xC3\xB3n \xE2\x80\x9C" "comillas\xE2\x80\x9D");
}

TEST(Decode, RandomBytesAreRejected) {
    std::mt19937_64 rng(20190120);
    std::string body(100, '\0');
    for (auto& c : body) c = static_cast<char>(rng() & 0xFF);
    // Independent count: bytes that are controls or undefined in windows-1252,
    // the most permissive single-byte candidate.
    std::size_t bad = 0;
    for (unsigned char b : body) {
        bool c0 = b < 0x20 && b != 0x09 && b != 0x0A && b != 0x0C && b != 0x0D;
        bool undefined = b == 0x7F || b == 0x81 || b == 0x8D || b == 0x8F || b == 0x90 || b == 0x9D;
        bad += c0 || undefined;
    }
    DecodedText d = decode_to_utf8(body);
    EXPECT_EQ(d.characters, 100u);
    EXPECT_EQ(d.replacements, bad);
    EXPECT_GT(d.replacement_ratio(), 0.05);
    EXPECT_FALSE(d.acceptable());
    EXPECT_TRUE(utf8::is_valid(d.text));
}

TEST(Decode, OutputIsAlwaysValidUtf8) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 300; ++i) {
        std::string body(1 + rng() % 300, '\0');
        for (auto& c : body) c = static_cast<char>(rng() & 0xFF);
        CharsetHints hints;
        if (i % 3 == 0) hints.http_header = "utf-8";
        if (i % 3 == 1) hints.meta_tag = "iso-8859-15";
        EXPECT_TRUE(utf8::is_valid(decode_to_utf8(body, hints).text));
    }
}

TEST(Extract, InlineMarkupDoesNotFragment) {
    auto ps = extract_paragraphs("<p>We offer <b>fast</b> transportation</p>");
    ASSERT_EQ(ps.size(), 1u);
    EXPECT_EQ(ps[0].text, "We offer fast transportation");
    EXPECT_EQ(ps[0].index, 0u);
}

TEST(Extract, BlocksAreParagraphsInOrder) {
    EXPECT_EQ(texts(extract_paragraphs("<p>Hola mundo.</p><p>Adiós.</p>")),
              (std::vector<std::string>{"Hola mundo.", "Adiós."}));
}

TEST(Extract, ArticleSurvivesNavAndFooter) {
    const char* html =
        "<html><body><nav><a href=/>Inicio</a><a href=/x>Contacto</a></nav>"
        "<header><h1>Diario</h1></header>"
        "<article><p>Primer párrafo del artículo.</p><p>Segundo <i>párrafo</i> del artículo.</p>"
        "<p>Tercer párrafo del artículo.</p></article>"
        "<aside>Anuncios</aside><footer><p>Aviso legal</p></footer></body></html>";
    EXPECT_EQ(texts(extract_paragraphs(html)),
              (std::vector<std::string>{"Primer párrafo del artículo.", "Segundo párrafo del artículo.",
                                        "Tercer párrafo del artículo."}));
}

TEST(Extract, DroppedContainersAndComments) {
    const char* html =
        "<script>document.write('<p>no</p>')</script><style>p{}</style><noscript>activa js</noscript>"
        "<form><p>campo</p></form><!-- <p>comentario</p> --><menu><li>Opción</li></menu>"
        "<p>Texto <img alt=\"descripcion\" title=\"titulo\"> visible</p>";
    EXPECT_EQ(texts(extract_paragraphs(html)), (std::vector<std::string>{"Texto visible"}));
}

TEST(Extract, BoilerplateOnlyPageYieldsNothing) {
    EXPECT_TRUE(extract_paragraphs(fixtures::boilerplate_page(0)).empty());
    EXPECT_TRUE(extract_paragraphs(fixtures::boilerplate_page(1)).empty());
}

TEST(Extract, BrPairSplitsSingleBrDoesNot) {
    EXPECT_EQ(texts(extract_paragraphs("<div>uno<br>dos<br> <br>tres</div>")),
              (std::vector<std::string>{"uno dos", "tres"}));
}

TEST(Extract, EntitiesAndWhitespace) {
    auto ps = extract_paragraphs("<p>  ni&ntilde;o &amp; ni&#241;a &#xF1;u\n\t&#150; &nbsp;fin  </p>");
    ASSERT_EQ(ps.size(), 1u);
    EXPECT_EQ(ps[0].text, "niño & niña ñu – fin");
    EXPECT_EQ(decode_entities("&lt;b&gt; &unknown; &#0; &#x110000;"), "<b> &unknown; \xEF\xBF\xBD \xEF\xBF\xBD");
}

TEST(Extract, TagSoupRecovers) {
    EXPECT_EQ(texts(extract_paragraphs("<p>uno<p>dos<div>tres</p></div>cuatro")),
              (std::vector<std::string>{"uno", "dos", "tres", "cuatro"}));
    EXPECT_EQ(texts(extract_paragraphs("<p>a < b y c > d</p>")), (std::vector<std::string>{"a < b y c > d"}));
    EXPECT_EQ(texts(extract_paragraphs("<p>sin cerrar <b")), (std::vector<std::string>{"sin cerrar"}));
}

TEST(Extract, SentinelsNeverFragmentOrMerge) {
    std::mt19937_64 rng(99);
    const std::vector<std::string> blocks{"p", "div", "li", "td", "blockquote", "h2", "section", "article"};
    const std::vector<std::string> inlines{"b", "i", "span", "a", "em", "strong", "code"};
    for (int trial = 0; trial < 200; ++trial) {
        std::string html = "<html><body>";
        std::vector<std::string> expected;
        int n = 1 + static_cast<int>(rng() % 8);
        for (int b = 0; b < n; ++b) {
            const std::string& tag = blocks[rng() % blocks.size()];
            std::string text;
            html += "<" + tag + ">";
            int tokens = 1 + static_cast<int>(rng() % 6);
            for (int t = 0; t < tokens; ++t) {
                std::string tok = "S" + std::to_string(trial) + "x" + std::to_string(b) + "x" + std::to_string(t);
                if (!text.empty()) text += ' ';
                text += tok;
                if (rng() % 2) {
                    const std::string& in = inlines[rng() % inlines.size()];
                    html += (t ? " <" : "<") + in + ">" + tok + "</" + in + ">";
                } else {
                    html += (t ? " " : "") + tok;
                }
            }
            html += "</" + tag + ">";
            if (rng() % 3 == 0) html += "<nav>N" + std::to_string(b) + " menu</nav>";
            expected.push_back(text);
        }
        html += "</body></html>";
        EXPECT_EQ(texts(extract_paragraphs(html)), expected) << html;
    }
}

TEST(Extract, Deterministic) {
    std::string html = fixtures::spanish_page(2);
    EXPECT_EQ(extract_paragraphs(html), extract_paragraphs(html));
}

TEST(Clean, ShortAndSymbolicParagraphsDropped) {
    Document d = fixtures::make_doc("d", {"©2019", "Esta es una frase completa."});
    auto out = clean_document(d, {});
    ASSERT_TRUE(out);
    ASSERT_EQ(out->paragraphs.size(), 1u);
    EXPECT_EQ(out->paragraphs[0].index, 0u);
    EXPECT_EQ(out->paragraphs[0].text, "Esta es una frase completa.");
}

TEST(Clean, CleanInputIsFixedPoint) {
    Document d = fixtures::make_doc("d", {"Una frase con sentido.", "Otra frase con sentido."});
    auto once = clean_document(d, {});
    ASSERT_TRUE(once);
    EXPECT_EQ(*once, d);
    EXPECT_EQ(*clean_document(*once, {}), *once);
}

TEST(Clean, TenParagraphFixture) {
    // Hand-applied rules: keep when words >= 3 and letters / non-space >= 0.5.
    std::vector<std::string> paras{
        "Tres palabras bastan",          // 3 words, all letters: keep
        "Dos palabras",                  // 2 words: drop
        "1234 5678 9012 3456",           // no letters: drop
        "Año 2019 fue bueno",            // 11 letters / 15 non-space: keep
        "Ref. 10,00 € 25,50 €",          // 3 / 16: drop
        "¡Hola! ¿Qué tal estás?",        // 15 / 19: keep
        "a b c",                         // 3 words, letters only: keep
        "--- *** ### ///",               // drop
        "Tel. 912 345 678 ext. 12",      // 6 / 19: drop
        "Un párrafo normal en castellano.", // keep
    };
    auto out = clean_document(fixtures::make_doc("d", paras), {});
    ASSERT_TRUE(out);
    std::vector<std::string> expected{paras[0], paras[3], paras[5], paras[6], paras[9]};
    std::vector<std::string> got;
    for (std::size_t i = 0; i < out->paragraphs.size(); ++i) {
        EXPECT_EQ(out->paragraphs[i].index, i);
        got.push_back(out->paragraphs[i].text);
    }
    EXPECT_EQ(got, expected);
}

TEST(Clean, NothingSurvives) {
    EXPECT_FALSE(clean_document(fixtures::make_doc("d", {"hola", "©"}), {}));
}

TEST(Clean, RatioAndWordCounts) {
    EXPECT_DOUBLE_EQ(alphabetic_ratio("ab12"), 0.5);
    EXPECT_DOUBLE_EQ(alphabetic_ratio("   "), 0.0);
    EXPECT_DOUBLE_EQ(alphabetic_ratio("ñandú"), 1.0);
    EXPECT_EQ(count_words("  uno  dos tres "), 3u);
    EXPECT_EQ(count_words(""), 0u);
}
