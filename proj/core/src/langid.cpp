#include "warcpipe/langid.hpp"

#include <unicode/uchar.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "warcpipe/errors.hpp"
#include "warcpipe/hash.hpp"
#include "warcpipe/utf8.hpp"

namespace warcpipe {

namespace {

constexpr std::string_view kProfileMagic = "#warcpipe-ngram-profile";
constexpr int kProfileVersion = 1;
constexpr char32_t kPad = U'_';
constexpr std::string_view kWordPrefix = "w:";

template <class Fn>
void visit_grams(std::string_view text, int min_n, int max_n, bool word_features, Fn&& fn) {
    std::u32string word;
    std::string gram;
    auto flush = [&] {
        if (word.empty()) return;
        word.insert(word.begin(), kPad);
        word.push_back(kPad);
        const int len = static_cast<int>(word.size());
        for (int n = min_n; n <= max_n; ++n) {
            for (int i = 0; i + n <= len; ++i) {
                if (n == 1 && word[i] == kPad) continue;
                gram.clear();
                for (int k = 0; k < n; ++k) utf8::append(gram, word[i + k]);
                fn(std::string_view(gram));
            }
        }
        if (word_features) {
            gram.assign(kWordPrefix);
            for (char32_t cp : word) utf8::append(gram, cp);
            fn(std::string_view(gram));
        }
        word.clear();
    };
    std::size_t pos = 0;
    while (pos < text.size()) {
        char32_t cp = utf8::next(text, pos);
        if (u_isalpha(static_cast<UChar32>(cp))) {
            word.push_back(static_cast<char32_t>(u_tolower(static_cast<UChar32>(cp))));
        } else {
            flush();
        }
    }
    flush();
}

std::vector<std::pair<std::string, std::size_t>> ranked_grams(std::string_view text, int min_n, int max_n,
                                                              std::size_t limit) {
    std::unordered_map<std::string, std::size_t> counts;
    visit_grams(text, min_n, max_n, false, [&](std::string_view g) { ++counts[std::string(g)]; });
    std::vector<std::pair<std::string, std::size_t>> sorted(counts.begin(), counts.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    if (sorted.size() > limit) sorted.resize(limit);
    return sorted;
}

std::string_view kind_name(NGramProfile::Kind k) { return k == NGramProfile::Kind::rank ? "rank" : "logprob"; }

[[noreturn]] void corrupt(const std::filesystem::path& path, const std::string& why) {
    throw ModelError("corrupt language profile " + path.string() + ": " + why);
}

double parse_double(std::string_view s, const std::filesystem::path& path) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v)) corrupt(path, "bad number '" + std::string(s) + "'");
    return v;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> out;
    for (;;) {
        std::size_t tab = line.find('\t');
        out.push_back(line.substr(0, tab));
        if (tab == std::string_view::npos) break;
        line.remove_prefix(tab + 1);
    }
    return out;
}

bool has_letter(std::string_view text) {
    std::size_t pos = 0;
    while (pos < text.size())
        if (u_isalpha(static_cast<UChar32>(utf8::next(text, pos)))) return true;
    return false;
}

void softmax_in_place(std::vector<double>& scores) {
    double best = *std::max_element(scores.begin(), scores.end());
    double sum = 0;
    for (double& s : scores) {
        s = std::exp(s - best);
        sum += s;
    }
    for (double& s : scores) s /= sum;
}

}  // namespace

std::vector<std::u32string> gram_words(std::string_view text) {
    std::vector<std::u32string> words;
    std::u32string word;
    std::size_t pos = 0;
    auto flush = [&] {
        if (word.empty()) return;
        words.push_back(U"_" + word + U"_");
        word.clear();
    };
    while (pos < text.size()) {
        char32_t cp = utf8::next(text, pos);
        if (u_isalpha(static_cast<UChar32>(cp))) word.push_back(static_cast<char32_t>(u_tolower(static_cast<UChar32>(cp))));
        else flush();
    }
    flush();
    return words;
}

void for_each_gram(std::string_view text, int min_n, int max_n, bool word_features,
                   const std::function<void(std::string_view)>& fn) {
    visit_grams(text, min_n, max_n, word_features, fn);
}

NGramProfile load_profile(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("language profile missing: " + path.string());

    NGramProfile p;
    std::string line;
    if (!std::getline(in, line)) corrupt(path, "empty file");
    auto magic = split_tabs(line);
    if (magic.size() != 2 || magic[0] != kProfileMagic) corrupt(path, "missing header");
    if (parse_double(magic[1], path) != kProfileVersion) corrupt(path, "unsupported version " + std::string(magic[1]));

    std::size_t expected = 0;
    bool have_lang = false, have_kind = false, have_n = false, have_grams = false;
    while (!have_grams && std::getline(in, line)) {
        auto f = split_tabs(line);
        if (f[0] == "lang" && f.size() == 2 && !f[1].empty()) {
            p.lang = f[1];
            have_lang = true;
        } else if (f[0] == "kind" && f.size() == 2) {
            if (f[1] == "rank") p.kind = NGramProfile::Kind::rank;
            else if (f[1] == "logprob") p.kind = NGramProfile::Kind::log_prob;
            else corrupt(path, "unknown kind");
            have_kind = true;
        } else if (f[0] == "n" && f.size() == 3) {
            p.min_n = static_cast<int>(parse_double(f[1], path));
            p.max_n = static_cast<int>(parse_double(f[2], path));
            if (p.min_n < 1 || p.max_n < p.min_n || p.max_n > 8) corrupt(path, "bad n range");
            have_n = true;
        } else if (f[0] == "words" && f.size() == 2) {
            p.word_features = f[1] == "1";
        } else if (f[0] == "unseen" && f.size() == 2) {
            p.unseen = parse_double(f[1], path);
        } else if (f[0] == "grams" && f.size() == 2) {
            expected = static_cast<std::size_t>(parse_double(f[1], path));
            have_grams = true;
        } else {
            corrupt(path, "unexpected header line '" + line + "'");
        }
    }
    if (!have_lang || !have_kind || !have_n || !have_grams) corrupt(path, "incomplete header");
    if (expected == 0) corrupt(path, "empty gram table");

    p.table.reserve(expected);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = split_tabs(line);
        if (f.size() != 2 || f[0].empty()) corrupt(path, "bad gram line");
        p.table.emplace_back(std::string(f[0]), parse_double(f[1], path));
    }
    if (p.table.size() != expected)
        corrupt(path, "expected " + std::to_string(expected) + " grams, found " + std::to_string(p.table.size()));
    return p;
}

void save_profile(const NGramProfile& p, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    char buf[64];
    auto num = [&](double v) {
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, end);
    };
    out << kProfileMagic << '\t' << kProfileVersion << '\n'
        << "lang\t" << p.lang << '\n'
        << "kind\t" << kind_name(p.kind) << '\n'
        << "n\t" << p.min_n << '\t' << p.max_n << '\n'
        << "words\t" << (p.word_features ? 1 : 0) << '\n';
    if (p.kind == NGramProfile::Kind::log_prob) out << "unseen\t" << num(p.unseen) << '\n';
    out << "grams\t" << p.table.size() << '\n';
    for (const auto& [gram, w] : p.table) out << gram << '\t' << num(w) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<NGramProfile> load_profile_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) throw ModelError("language model directory missing: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".tsv") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ModelError("no language profiles in " + dir.string());
    std::vector<NGramProfile> profiles;
    for (const auto& f : files) profiles.push_back(load_profile(f));
    return profiles;
}

RankProfileDetector::RankProfileDetector(std::vector<NGramProfile> profiles, std::size_t min_chars)
    : min_chars_(min_chars) {
    if (profiles.empty()) throw ModelError("stage-1 detector needs at least one profile");
    std::sort(profiles.begin(), profiles.end(), [](const auto& a, const auto& b) { return a.lang < b.lang; });
    min_n_ = profiles.front().min_n;
    max_n_ = profiles.front().max_n;
    for (auto& p : profiles) {
        if (p.kind != NGramProfile::Kind::rank) throw ModelError("stage-1 profile '" + p.lang + "' is not a rank profile");
        if (p.min_n != min_n_ || p.max_n != max_n_) throw ModelError("stage-1 profiles disagree on n range");
        Profile out{p.lang, {}};
        for (const auto& [gram, rank] : p.table) out.ranks.emplace(gram, static_cast<std::size_t>(rank));
        doc_profile_size_ = std::max(doc_profile_size_, out.ranks.size());
        profiles_.push_back(std::move(out));
    }
}

RankProfileDetector RankProfileDetector::from_dir(const std::filesystem::path& dir, std::size_t min_chars) {
    return RankProfileDetector(load_profile_dir(dir), min_chars);
}

std::vector<std::pair<std::string, double>> RankProfileDetector::distances(std::string_view text) const {
    auto doc = ranked_grams(text, min_n_, max_n_, doc_profile_size_);
    std::vector<std::pair<std::string, double>> out;
    out.reserve(profiles_.size());
    for (const auto& p : profiles_) {
        const std::size_t penalty = p.ranks.size();
        double d = 0;
        for (std::size_t r = 0; r < doc.size(); ++r) {
            auto it = p.ranks.find(doc[r].first);
            d += it == p.ranks.end() ? static_cast<double>(penalty)
                                     : std::abs(static_cast<double>(r) - static_cast<double>(it->second));
        }
        out.emplace_back(p.lang, d);
    }
    return out;
}

LanguageVerdict RankProfileDetector::detect(std::string_view text) const {
    LanguageVerdict v;
    v.stage = DetectionStage::stage1;
    if (utf8::count_code_points(text) < min_chars_ || !has_letter(text)) return v;
    auto d = distances(text);
    std::stable_sort(d.begin(), d.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
    v.lang = d.front().first;
    double second = d.size() > 1 ? d[1].second : d.front().second * 2;
    v.confidence = second > 0 ? std::clamp((second - d.front().second) / second, 0.0, 1.0) : 0.0;
    return v;
}

NaiveBayesDetector::NaiveBayesDetector(std::vector<NGramProfile> profiles) {
    if (profiles.empty()) throw ModelError("stage-2 detector needs at least one profile");
    std::sort(profiles.begin(), profiles.end(), [](const auto& a, const auto& b) { return a.lang < b.lang; });
    min_n_ = profiles.front().min_n;
    max_n_ = profiles.front().max_n;
    word_features_ = profiles.front().word_features;
    const std::size_t L = profiles.size();
    for (const auto& p : profiles) {
        if (p.kind != NGramProfile::Kind::log_prob) throw ModelError("stage-2 profile '" + p.lang + "' is not a log-probability profile");
        if (p.min_n != min_n_ || p.max_n != max_n_ || p.word_features != word_features_)
            throw ModelError("stage-2 profiles disagree on feature set");
        langs_.push_back(p.lang);
        unseen_.push_back(static_cast<float>(p.unseen));
    }
    for (std::size_t l = 0; l < L; ++l) {
        for (const auto& [gram, logp] : profiles[l].table) {
            auto [it, inserted] = rows_.try_emplace(murmur3_64(gram), static_cast<std::uint32_t>(rows_.size()));
            if (inserted) weights_.insert(weights_.end(), unseen_.begin(), unseen_.end());
            weights_[it->second * L + l] = static_cast<float>(logp);
        }
    }
}

NaiveBayesDetector NaiveBayesDetector::from_dir(const std::filesystem::path& dir) {
    return NaiveBayesDetector(load_profile_dir(dir));
}

std::vector<std::pair<std::string, double>> NaiveBayesDetector::posteriors(std::string_view text) const {
    const std::size_t L = langs_.size();
    std::vector<double> scores(L, 0.0);
    std::size_t grams = 0;
    visit_grams(text, min_n_, max_n_, word_features_, [&](std::string_view g) {
        ++grams;
        auto it = rows_.find(murmur3_64(g));
        if (it == rows_.end()) {
            for (std::size_t l = 0; l < L; ++l) scores[l] += unseen_[l];
        } else {
            const float* row = weights_.data() + static_cast<std::size_t>(it->second) * L;
            for (std::size_t l = 0; l < L; ++l) scores[l] += row[l];
        }
    });
    if (grams == 0) return {};
    const double orders = static_cast<double>(max_n_ - min_n_ + 1 + (word_features_ ? 1 : 0));
    for (double& s : scores) s /= orders;
    softmax_in_place(scores);
    std::vector<std::pair<std::string, double>> out;
    for (std::size_t l = 0; l < L; ++l) out.emplace_back(langs_[l], scores[l]);
    return out;
}

LanguageVerdict NaiveBayesDetector::detect(std::string_view text) const {
    LanguageVerdict v;
    v.stage = DetectionStage::stage2;
    auto post = posteriors(text);
    if (post.empty()) return v;
    auto best = std::max_element(post.begin(), post.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
    v.lang = best->first;
    v.confidence = std::clamp(best->second, 0.0, 1.0);
    return v;
}

bool accept_target(const LanguageVerdict& stage1, const LanguageVerdict& stage2, const LangIdConfig& cfg) {
    if (stage1.undetermined() || stage2.undetermined()) return false;
    return stage1.lang == cfg.target && stage2.lang == cfg.target && stage2.confidence >= cfg.min_conf;
}

LanguageCascade::LanguageCascade(std::shared_ptr<const LanguageDetector> stage1,
                                 std::shared_ptr<const LanguageDetector> stage2, LangIdConfig cfg)
    : stage1_(std::move(stage1)), stage2_(std::move(stage2)), cfg_(std::move(cfg)) {
    if (!stage1_ || !stage2_) throw ConfigError("language cascade needs both stages");
    if (cfg_.min_conf < 0 || cfg_.min_conf > 1) throw ConfigError("min_conf must be within [0, 1]");
}

CascadeVerdict LanguageCascade::evaluate(std::string_view text) const {
    CascadeVerdict out;
    out.stage1 = stage1_->detect(text);
    if (out.stage1.undetermined() || out.stage1.lang != cfg_.target) return out;
    out.stage2 = stage2_->detect(text);
    out.accepted = accept_target(out.stage1, *out.stage2, cfg_);
    return out;
}

LanguageCascade load_cascade(const std::filesystem::path& model_dir, const LangIdConfig& cfg,
                             const std::string& external_stage2) {
    auto stage1 = std::make_shared<RankProfileDetector>(RankProfileDetector::from_dir(model_dir / "stage1", cfg.min_chars));
    std::shared_ptr<const LanguageDetector> stage2;
    if (external_stage2.empty()) stage2 = std::make_shared<NaiveBayesDetector>(NaiveBayesDetector::from_dir(model_dir / "stage2"));
    else stage2 = std::make_shared<ExternalDetector>(external_stage2);
    return LanguageCascade(std::move(stage1), std::move(stage2), cfg);
}

NGramProfile train_rank_profile(const std::string& lang, std::string_view corpus, int max_n, std::size_t size) {
    NGramProfile p;
    p.lang = lang;
    p.kind = NGramProfile::Kind::rank;
    p.min_n = 1;
    p.max_n = max_n;
    auto ranked = ranked_grams(corpus, 1, max_n, size);
    for (std::size_t r = 0; r < ranked.size(); ++r) p.table.emplace_back(ranked[r].first, static_cast<double>(r));
    return p;
}

std::vector<NGramProfile> train_bayes_profiles(const std::map<std::string, std::string>& corpora, int max_n,
                                               double alpha) {
    std::map<std::string, std::map<std::string, std::size_t>> counts;
    std::unordered_map<std::string, bool> vocabulary;
    for (const auto& [lang, text] : corpora) {
        auto& c = counts[lang];
        visit_grams(text, 1, max_n, true, [&](std::string_view g) {
            ++c[std::string(g)];
            vocabulary.try_emplace(std::string(g), true);
        });
    }
    const double v = static_cast<double>(vocabulary.size());
    std::vector<NGramProfile> out;
    for (const auto& [lang, c] : counts) {
        double total = 0;
        for (const auto& [g, n] : c) total += static_cast<double>(n);
        const double denom = std::log(total + alpha * v);
        NGramProfile p;
        p.lang = lang;
        p.kind = NGramProfile::Kind::log_prob;
        p.min_n = 1;
        p.max_n = max_n;
        p.word_features = true;
        p.unseen = std::log(alpha) - denom;
        for (const auto& [g, n] : c) p.table.emplace_back(g, std::log(static_cast<double>(n) + alpha) - denom);
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace warcpipe
