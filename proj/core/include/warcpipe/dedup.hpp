#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "warcpipe/extract.hpp"
#include "warcpipe/hash.hpp"

namespace warcpipe {

// NFKC, lowercase, drop punctuation, symbols and decimal digits, collapse
// whitespace, trim. Key material only; stored text is never rewritten.
std::string normalize_for_dedup(std::string_view text);

struct DedupKey {
    Hash128 digest;

    // Key of already-normalised text.
    static DedupKey of_normalized(std::string_view normalized);
    // Normalises `text` first.
    static DedupKey of(std::string_view text) { return of_normalized(normalize_for_dedup(text)); }

    friend bool operator==(const DedupKey&, const DedupKey&) = default;
};

struct DedupKeyHasher {
    std::size_t operator()(const DedupKey& k) const noexcept { return Hash128Hasher{}(k.digest); }
};

// First occurrence wins over the whole stream. Surviving documents are passed
// through untouched.
class ExactDocumentDeduper {
  public:
    // True when the document is the first with its normalised full text.
    bool admit(const Document& doc);
    std::size_t removed() const { return removed_; }
    std::size_t distinct() const { return seen_.size(); }

  private:
    std::unordered_set<DedupKey, DedupKeyHasher> seen_;
    std::size_t removed_ = 0;
};

// Corpus-wide first-occurrence filter on normalised paragraphs. Later copies are
// cut out of their documents; a document left with no paragraph is dropped.
class ExactParagraphDeduper {
  public:
    std::optional<Document> filter(Document doc);

    std::size_t paragraphs_removed() const { return paragraphs_removed_; }
    std::size_t documents_emptied() const { return documents_emptied_; }

  private:
    std::unordered_set<DedupKey, DedupKeyHasher> seen_;
    std::size_t paragraphs_removed_ = 0;
    std::size_t documents_emptied_ = 0;
};

struct ExactDedupStats {
    std::size_t documents_removed = 0;
    std::size_t paragraphs_removed = 0;
    std::size_t documents_emptied = 0;
};

std::vector<Document> dedup_exact_documents(std::vector<Document> docs, ExactDedupStats* stats = nullptr);
std::vector<Document> dedup_exact_paragraphs(std::vector<Document> docs, ExactDedupStats* stats = nullptr);

// Sorted, duplicate-free set of w-word windows joined by single spaces.
using ShingleSet = std::vector<std::string>;

// Expects normalize_for_dedup output. A text with fewer than w words (but at
// least one) yields itself as the only shingle; an empty text yields nothing.
ShingleSet shingle(std::string_view normalized, std::size_t w);

double jaccard(const ShingleSet& a, const ShingleSet& b);

// The same shingles reduced to sorted, duplicate-free murmur3_64(shingle, seed)
// values, built without materializing the shingle strings. Jaccard over these
// equals the string Jaccard unless two distinct shingles collide in 64 bits.
using HashedShingles = std::vector<std::uint64_t>;

HashedShingles hash_shingles(std::string_view normalized, std::size_t w, std::uint64_t seed);

double jaccard(const HashedShingles& a, const HashedShingles& b);

struct LshParams {
    std::size_t shingle_size = 5;
    std::size_t num_perms = 128;
    std::size_t bands = 16;
    std::size_t rows = 8;
    double jaccard_threshold = 0.8;

    // Throws ConfigError unless bands * rows == num_perms and the threshold
    // lies in (0, 1].
    void validate() const;

    // Probability that a pair with Jaccard j shares at least one band.
    double candidate_probability(double j) const;
};

struct MinHashSignature {
    std::vector<std::uint64_t> values;

    friend bool operator==(const MinHashSignature&, const MinHashSignature&) = default;
};

// k hash functions from one 64-bit family: h_i(x) = fmix64(murmur3(x, seed) ^ s_i)
// with s_i drawn from a splitmix64 sequence seeded by `seed`.
class MinHasher {
  public:
    MinHasher(std::size_t num_perms, std::uint64_t seed);

    // Throws std::invalid_argument for an empty set.
    MinHashSignature signature(const ShingleSet& shingles) const;

    // Same result as signature(ShingleSet) when the hashes were built with
    // this hasher's seed.
    MinHashSignature signature(const HashedShingles& hashes) const;
    std::uint64_t seed() const { return seed_; }

  private:
    std::uint64_t seed_;
    std::vector<std::uint64_t> perm_seeds_;
};

MinHashSignature minhash_signature(const ShingleSet& shingles, const LshParams& params, std::uint64_t seed);

// Fraction of agreeing positions.
double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b);

// Band tables, one per band, so bands can be filled independently.
class LshIndex {
  public:
    explicit LshIndex(const LshParams& params);

    void insert_band(std::size_t band, std::uint32_t doc, const MinHashSignature& sig);
    void insert(std::uint32_t doc, const MinHashSignature& sig);

    // Every pair (i < j) sharing at least one band bucket, sorted and unique.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> candidate_pairs() const;

    std::size_t bands() const { return tables_.size(); }

  private:
    std::uint64_t band_key(std::size_t band, const MinHashSignature& sig) const;

    LshParams params_;
    std::vector<std::vector<std::pair<std::uint64_t, std::uint32_t>>> tables_;
};

// Signatures in canonical order -> candidate pairs, filling bands in parallel.
// Entries with no signature (content-free documents) are never candidates.
std::vector<std::pair<std::uint32_t, std::uint32_t>> lsh_candidates(
    std::span<const std::optional<MinHashSignature>> signatures, const LshParams& params, std::size_t workers = 1);

struct NearDuplicatePlan {
    // absorbed_by[j] is the kept document j duplicates, or nullopt if j survives.
    std::vector<std::optional<std::uint32_t>> absorbed_by;
    std::vector<double> similarity;  // verified Jaccard against absorbed_by
    std::size_t candidate_pairs = 0;
    std::size_t verified_pairs = 0;

    std::size_t removed() const;
};

// Single-threaded resolution in canonical order: a document is removed when an
// earlier surviving candidate has exact shingle Jaccard >= threshold; the
// earliest such document absorbs it.
NearDuplicatePlan resolve_candidates(std::size_t count,
                                     std::span<const std::pair<std::uint32_t, std::uint32_t>> pairs,
                                     double threshold,
                                     const std::function<const ShingleSet&(std::uint32_t)>& shingles_of);
NearDuplicatePlan resolve_candidates(std::size_t count,
                                     std::span<const std::pair<std::uint32_t, std::uint32_t>> pairs,
                                     double threshold,
                                     const std::function<const HashedShingles&(std::uint32_t)>& shingles_of);

struct DuplicateCluster {
    std::string kept_id;
    std::vector<std::string> removed_ids;
    std::vector<double> similarities;  // parallel to removed_ids
};

// Groups a plan into clusters, ordered by kept document.
std::vector<DuplicateCluster> clusters_from_plan(const NearDuplicatePlan& plan,
                                                 const std::function<std::string(std::uint32_t)>& id_of);

struct LshDedupResult {
    std::vector<Document> survivors;
    std::vector<DuplicateCluster> clusters;
    std::size_t candidate_pairs = 0;
};

// Whole-document near-duplicate removal; survivors keep their exact content.
// Documents are shingled from normalize_for_dedup(joined_text()).
LshDedupResult lsh_near_dedup(std::vector<Document> docs, const LshParams& params, std::uint64_t seed,
                              std::size_t workers = 1);

}  // namespace warcpipe
