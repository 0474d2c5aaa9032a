#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "warcpipe/errors.hpp"
#include "warcpipe/langid.hpp"

using namespace warcpipe;

namespace {

const char* kSpanish = "El perro corre por el parque todas las mañanas antes de desayunar.";
const char* kEnglish = "The quick brown fox jumps over the lazy dog near the river bank.";
const char* kPortuguese = "O cachorro corre pelo parque todas as manhãs.";

class FixedDetector final : public LanguageDetector {
  public:
    FixedDetector(std::string lang, double conf, DetectionStage stage) {
        v_.lang = std::move(lang);
        v_.confidence = conf;
        v_.stage = stage;
    }
    LanguageVerdict detect(std::string_view) const override { return v_; }

  private:
    LanguageVerdict v_;
};

const RankProfileDetector& stage1() {
    static RankProfileDetector d = RankProfileDetector::from_dir(fixtures::model_dir() / "stage1");
    return d;
}

const NaiveBayesDetector& stage2() {
    static NaiveBayesDetector d = NaiveBayesDetector::from_dir(fixtures::model_dir() / "stage2");
    return d;
}

const LanguageCascade& cascade() {
    static LanguageCascade c = load_cascade(fixtures::model_dir(), LangIdConfig{});
    return c;
}

std::vector<std::pair<std::string, std::string>> curated_set() {
    std::ifstream in(fixtures::source_dir() / "tests/data/langid_sentences.tsv");
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto tab = line.find('\t');
        out.emplace_back(line.substr(0, tab), line.substr(tab + 1));
    }
    return out;
}

LanguageVerdict verdict(std::string lang, double conf, DetectionStage stage) {
    LanguageVerdict v;
    v.lang = std::move(lang);
    v.confidence = conf;
    v.stage = stage;
    return v;
}

}  // namespace

TEST(Stage1, ShortInputIsUndetermined) {
    LanguageVerdict v = stage1().detect("El perro corre mucho");
    EXPECT_EQ(v.lang, "und");
    EXPECT_EQ(v.confidence, 0.0);
    EXPECT_EQ(v.stage, DetectionStage::stage1);
}

TEST(Stage1, SpanishAndEnglishSentences) {
    EXPECT_EQ(stage1().detect(kSpanish).lang, "es");
    EXPECT_EQ(stage1().detect(kEnglish).lang, "en");
}

TEST(Stage1, ConfidenceInUnitInterval) {
    for (const auto& [lang, text] : curated_set()) {
        LanguageVerdict v = stage1().detect(text);
        EXPECT_GE(v.confidence, 0.0);
        EXPECT_LE(v.confidence, 1.0);
    }
}

TEST(Stage1, CuratedSetMatchesLabels) {
    for (const auto& [lang, text] : curated_set()) EXPECT_EQ(stage1().detect(text).lang, lang) << text;
}

TEST(Stage2, EmptyStringIsUndetermined) {
    LanguageVerdict v = stage2().detect("");
    EXPECT_EQ(v.lang, "und");
    EXPECT_EQ(v.confidence, 0.0);
    EXPECT_EQ(v.stage, DetectionStage::stage2);
}

TEST(Stage2, SpanishWithHighConfidence) {
    LanguageVerdict v = stage2().detect(kSpanish);
    EXPECT_EQ(v.lang, "es");
    EXPECT_GE(v.confidence, 0.9);
}

TEST(Stage2, PortugueseIsNotSpanish) {
    EXPECT_EQ(stage2().detect(kPortuguese).lang, "pt");
}

TEST(Stage2, CoversLargerProfileSet) {
    const auto& langs = stage2().languages();
    for (const char* l : {"es", "en", "pt", "ca", "gl", "fr", "it", "de"})
        EXPECT_NE(std::find(langs.begin(), langs.end(), l), langs.end()) << l;
}

TEST(Stage2, PosteriorsSumToOne) {
    double total = 0;
    for (const auto& [lang, p] : stage2().posteriors(kSpanish)) total += p;
    EXPECT_NEAR(total, 1.0, 1e-9);
    EXPECT_TRUE(stage2().posteriors("1234 !!").empty());
}

TEST(Stage2, Deterministic) {
    for (const auto& [lang, text] : curated_set()) {
        LanguageVerdict a = stage2().detect(text);
        LanguageVerdict b = stage2().detect(text);
        EXPECT_EQ(a.lang, b.lang);
        EXPECT_EQ(a.confidence, b.confidence);
    }
}

TEST(AcceptTarget, ConjunctionIsMandatory) {
    LangIdConfig cfg;
    EXPECT_FALSE(accept_target(verdict("es", 0.99, DetectionStage::stage1), verdict("gl", 0.99, DetectionStage::stage2), cfg));
    EXPECT_FALSE(accept_target(verdict("gl", 0.99, DetectionStage::stage1), verdict("es", 0.99, DetectionStage::stage2), cfg));
    EXPECT_TRUE(accept_target(verdict("es", 0.5, DetectionStage::stage1), verdict("es", 0.95, DetectionStage::stage2), cfg));
}

TEST(AcceptTarget, ConfidenceThresholdIsInclusive) {
    LangIdConfig cfg;
    auto s1 = verdict("es", 1.0, DetectionStage::stage1);
    EXPECT_TRUE(accept_target(s1, verdict("es", 0.8, DetectionStage::stage2), cfg));
    EXPECT_FALSE(accept_target(s1, verdict("es", 0.79, DetectionStage::stage2), cfg));
}

TEST(AcceptTarget, UndeterminedNeverAccepted) {
    LangIdConfig cfg;
    cfg.target = "und";
    cfg.min_conf = 0.0;
    EXPECT_FALSE(accept_target(verdict("und", 0, DetectionStage::stage1), verdict("und", 0, DetectionStage::stage2), cfg));
}

TEST(Cascade, StubbedStagesFollowTheRule) {
    auto es1 = std::make_shared<FixedDetector>("es", 1.0, DetectionStage::stage1);
    auto gl2 = std::make_shared<FixedDetector>("gl", 0.99, DetectionStage::stage2);
    auto es2 = std::make_shared<FixedDetector>("es", 0.95, DetectionStage::stage2);
    EXPECT_FALSE(LanguageCascade(es1, gl2, LangIdConfig{}).accept("anything at all"));
    EXPECT_TRUE(LanguageCascade(es1, es2, LangIdConfig{}).accept("anything at all"));
}

TEST(Cascade, Stage2SkippedWhenStage1Rejects) {
    auto en1 = std::make_shared<FixedDetector>("en", 1.0, DetectionStage::stage1);
    auto es2 = std::make_shared<FixedDetector>("es", 0.99, DetectionStage::stage2);
    CascadeVerdict v = LanguageCascade(en1, es2, LangIdConfig{}).evaluate("text");
    EXPECT_FALSE(v.accepted);
    EXPECT_FALSE(v.stage2.has_value());
}

TEST(Cascade, CuratedSetAcceptsExactlyTheSpanishSentences) {
    std::vector<std::string> accepted, spanish;
    for (const auto& [lang, text] : curated_set()) {
        if (lang == "es") spanish.push_back(text);
        if (cascade().accept(text)) accepted.push_back(text);
    }
    ASSERT_EQ(spanish.size(), 25u);
    EXPECT_EQ(accepted, spanish);
}

TEST(Cascade, NeverAcceptsMoreThanStage1) {
    std::size_t stage1_accepts = 0, cascade_accepts = 0;
    for (const auto& [lang, text] : curated_set()) {
        bool s1 = stage1().detect(text).lang == "es";
        bool c = cascade().accept(text);
        if (c) EXPECT_TRUE(s1) << text;
        stage1_accepts += s1;
        cascade_accepts += c;
    }
    EXPECT_LE(cascade_accepts, stage1_accepts);
}

TEST(Profiles, SaveLoadRoundTrip) {
    NGramProfile p = train_rank_profile("es", "el perro corre por el parque y la casa", 3, 50);
    auto dir = fixtures::temp_dir("profile");
    save_profile(p, dir / "es.tsv");
    NGramProfile q = load_profile(dir / "es.tsv");
    EXPECT_EQ(q.lang, p.lang);
    EXPECT_EQ(q.kind, p.kind);
    EXPECT_EQ(q.min_n, p.min_n);
    EXPECT_EQ(q.max_n, p.max_n);
    EXPECT_EQ(q.table, p.table);
}

TEST(Profiles, RankProfileHoldsRequestedSize) {
    NGramProfile p = train_rank_profile("es", kSpanish, 5, 30);
    EXPECT_EQ(p.table.size(), 30u);
    for (std::size_t i = 0; i < p.table.size(); ++i) EXPECT_EQ(p.table[i].second, static_cast<double>(i));
}

TEST(Profiles, MissingOrCorruptModelFailsFast) {
    auto dir = fixtures::temp_dir("badmodel");
    EXPECT_THROW(load_profile_dir(dir / "nope"), ModelError);
    EXPECT_THROW(load_profile_dir(dir), ModelError);
    fixtures::write_file(dir / "es.tsv", "#warcpipe-ngram-profile\t1\nlang\tes\nkind\trank\n");
    EXPECT_THROW(load_profile_dir(dir), ModelError);
    fixtures::write_file(dir / "es.tsv", "garbage\n");
    EXPECT_THROW(load_profile(dir / "es.tsv"), ModelError);
    EXPECT_THROW(load_cascade(dir, LangIdConfig{}), ModelError);
}

TEST(Grams, WordsArePaddedAndLowerCased) {
    auto words = gram_words("¡Perro, GATO!");
    ASSERT_EQ(words.size(), 2u);
    EXPECT_EQ(words[0], U"_perro_");
    EXPECT_EQ(words[1], U"_gato_");
}

TEST(Grams, EnumerationCountsByLength) {
    // "_ab_" has 2 unigrams, 3 bigrams, 2 trigrams and 1 quadgram once pure padding is excluded.
    std::vector<std::string> grams;
    for_each_gram("ab", 1, 4, false, [&](std::string_view g) { grams.emplace_back(g); });
    std::sort(grams.begin(), grams.end());
    std::vector<std::string> want = {"_a", "_ab", "_ab_", "a", "ab", "ab_", "b", "b_"};
    std::sort(want.begin(), want.end());
    EXPECT_EQ(grams, want);
}

TEST(External, LineProtocol) {
    auto dir = fixtures::temp_dir("extdet");
    auto script = dir / "det.sh";
    fixtures::write_file(script, "#!/bin/sh\nwhile read l; do printf 'es\\t0.95\\n'; done\n");
    std::filesystem::permissions(script, std::filesystem::perms::owner_all);
    ExternalDetector det(script.string());
    LanguageVerdict v = det.detect("cualquier texto\ncon saltos\tde linea");
    EXPECT_EQ(v.lang, "es");
    EXPECT_DOUBLE_EQ(v.confidence, 0.95);
    EXPECT_EQ(v.stage, DetectionStage::stage2);
}

TEST(External, UsableAsStage2) {
    auto dir = fixtures::temp_dir("extcascade");
    auto script = dir / "det.sh";
    fixtures::write_file(script, "#!/bin/sh\nwhile read l; do printf 'gl\\t0.99\\n'; done\n");
    std::filesystem::permissions(script, std::filesystem::perms::owner_all);
    LanguageCascade c = load_cascade(fixtures::model_dir(), LangIdConfig{}, script.string());
    EXPECT_FALSE(c.accept(kSpanish));
}

TEST(External, BrokenProgramIsConfigError) {
    EXPECT_THROW(ExternalDetector("/nonexistent/detector-binary"), ConfigError);
    auto dir = fixtures::temp_dir("extbad");
    auto script = dir / "bad.sh";
    fixtures::write_file(script, "#!/bin/sh\nwhile read l; do echo nonsense; done\n");
    std::filesystem::permissions(script, std::filesystem::perms::owner_all);
    EXPECT_THROW(ExternalDetector(script.string()), ConfigError);
}
