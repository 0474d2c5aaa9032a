#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace warcpipe {

enum class DetectionStage { stage1, stage2 };

inline constexpr std::string_view kUndetermined = "und";

struct LanguageVerdict {
    std::string lang{kUndetermined};
    double confidence = 0.0;  // in [0, 1]
    DetectionStage stage = DetectionStage::stage1;

    bool undetermined() const { return lang == kUndetermined; }
};

// Gram table for one language. Rank profiles store 0-based ranks (lower is
// more frequent); log-probability profiles store natural-log probabilities
// plus the value used for grams the language never produced.
struct NGramProfile {
    enum class Kind { rank, log_prob };

    std::string lang;
    Kind kind = Kind::rank;
    int min_n = 1;
    int max_n = 5;
    bool word_features = false;
    double unseen = 0.0;
    std::vector<std::pair<std::string, double>> table;
};

// Versioned TSV profile format; see README ("Language profiles").
NGramProfile load_profile(const std::filesystem::path& path);
void save_profile(const NGramProfile& profile, const std::filesystem::path& path);

// All *.tsv profiles of a directory in lexical order. Throws ModelError when
// the directory is missing, empty or holds a corrupt file.
std::vector<NGramProfile> load_profile_dir(const std::filesystem::path& dir);

// Lower-cased letter runs padded with '_' ("_perro_"), the unit all grams are
// cut from. Non-letters separate words.
std::vector<std::u32string> gram_words(std::string_view text);

// Character n-grams of the padded words, min_n..max_n, excluding grams made only
// of padding. With word_features the whole padded word is added as well.
void for_each_gram(std::string_view text, int min_n, int max_n, bool word_features,
                   const std::function<void(std::string_view)>& fn);

class LanguageDetector {
  public:
    virtual ~LanguageDetector() = default;
    virtual LanguageVerdict detect(std::string_view text) const = 0;
};

// Out-of-place rank distance between the text's gram ranking and each
// language profile; the closest profile wins.
class RankProfileDetector final : public LanguageDetector {
  public:
    RankProfileDetector(std::vector<NGramProfile> profiles, std::size_t min_chars = 40);
    static RankProfileDetector from_dir(const std::filesystem::path& dir, std::size_t min_chars = 40);

    LanguageVerdict detect(std::string_view text) const override;

    // Distance of `text` to every language, ascending language code order.
    std::vector<std::pair<std::string, double>> distances(std::string_view text) const;

  private:
    struct Profile {
        std::string lang;
        std::unordered_map<std::string, std::size_t> ranks;
    };
    std::vector<Profile> profiles_;
    int min_n_ = 1;
    int max_n_ = 5;
    std::size_t doc_profile_size_ = 0;
    std::size_t min_chars_;
};

// Multinomial naive Bayes over character n-grams and words. Per-gram log
// likelihoods are tempered by the number of feature orders so the softmax
// posterior is usable as a confidence.
class NaiveBayesDetector final : public LanguageDetector {
  public:
    explicit NaiveBayesDetector(std::vector<NGramProfile> profiles);
    static NaiveBayesDetector from_dir(const std::filesystem::path& dir);

    LanguageVerdict detect(std::string_view text) const override;

    // Posterior per language, ascending language code order. Empty when the
    // text has no letters.
    std::vector<std::pair<std::string, double>> posteriors(std::string_view text) const;

    const std::vector<std::string>& languages() const { return langs_; }

  private:
    std::vector<std::string> langs_;
    std::vector<float> unseen_;
    std::unordered_map<std::uint64_t, std::uint32_t> rows_;
    std::vector<float> weights_;  // rows_ index * langs + lang
    int min_n_ = 1;
    int max_n_ = 4;
    bool word_features_ = true;
};

// Delegates to an operator-supplied program speaking a line protocol: one text
// per line on stdin (newlines and tabs folded to spaces), one "lang<TAB>confidence"
// line back on stdout. The process is started once and probed at construction;
// a program that cannot start or answers malformed lines is a ConfigError.
class ExternalDetector final : public LanguageDetector {
  public:
    explicit ExternalDetector(std::string command, DetectionStage stage = DetectionStage::stage2);
    ~ExternalDetector() override;
    ExternalDetector(const ExternalDetector&) = delete;
    ExternalDetector& operator=(const ExternalDetector&) = delete;

    LanguageVerdict detect(std::string_view text) const override;

  private:
    LanguageVerdict query(std::string_view text) const;

    std::string command_;
    DetectionStage stage_;
    int pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    mutable std::mutex mutex_;
    mutable std::string pending_;
};

struct LangIdConfig {
    std::string target = "es";
    double min_conf = 0.8;
    std::size_t min_chars = 40;
};

struct CascadeVerdict {
    LanguageVerdict stage1;
    std::optional<LanguageVerdict> stage2;  // absent when stage 1 already rejected
    bool accepted = false;
};

// Stage 1 screens, stage 2 verifies: a text is kept only if both name the
// target and stage 2 is at least min_conf sure.
class LanguageCascade {
  public:
    LanguageCascade(std::shared_ptr<const LanguageDetector> stage1,
                    std::shared_ptr<const LanguageDetector> stage2, LangIdConfig cfg);

    CascadeVerdict evaluate(std::string_view text) const;
    bool accept(std::string_view text) const { return evaluate(text).accepted; }

    const LangIdConfig& config() const { return cfg_; }
    const LanguageDetector& stage1() const { return *stage1_; }
    const LanguageDetector& stage2() const { return *stage2_; }

  private:
    std::shared_ptr<const LanguageDetector> stage1_;
    std::shared_ptr<const LanguageDetector> stage2_;
    LangIdConfig cfg_;
};

// The acceptance rule on its own.
bool accept_target(const LanguageVerdict& stage1, const LanguageVerdict& stage2, const LangIdConfig& cfg);

// Loads <model_dir>/stage1 and, unless external_stage2 is set, <model_dir>/stage2.
LanguageCascade load_cascade(const std::filesystem::path& model_dir, const LangIdConfig& cfg,
                             const std::string& external_stage2 = {});

// Training helpers used by warcpipe-train-langid.
NGramProfile train_rank_profile(const std::string& lang, std::string_view corpus, int max_n = 5,
                                std::size_t size = 400);
std::vector<NGramProfile> train_bayes_profiles(const std::map<std::string, std::string>& corpora,
                                               int max_n = 4, double alpha = 0.5);

}  // namespace warcpipe
