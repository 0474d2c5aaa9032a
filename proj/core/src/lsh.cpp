#include <algorithm>
#include <map>

#include "warcpipe/dedup.hpp"
#include "warcpipe/parallel.hpp"

namespace warcpipe {

LshIndex::LshIndex(const LshParams& params) : params_(params) {
    params_.validate();
    tables_.resize(params_.bands);
}

std::uint64_t LshIndex::band_key(std::size_t band, const MinHashSignature& sig) const {
    std::uint64_t h = 0x6c7368ULL + band;
    for (std::size_t r = 0; r < params_.rows; ++r) h = fmix64(h ^ sig.values[band * params_.rows + r]) + r;
    return h;
}

void LshIndex::insert_band(std::size_t band, std::uint32_t doc, const MinHashSignature& sig) {
    tables_.at(band).emplace_back(band_key(band, sig), doc);
}

void LshIndex::insert(std::uint32_t doc, const MinHashSignature& sig) {
    for (std::size_t b = 0; b < tables_.size(); ++b) insert_band(b, doc, sig);
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> LshIndex::candidate_pairs() const {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    for (auto table : tables_) {
        std::sort(table.begin(), table.end());
        for (std::size_t i = 0; i < table.size();) {
            std::size_t j = i;
            while (j < table.size() && table[j].first == table[i].first) ++j;
            for (std::size_t a = i; a < j; ++a)
                for (std::size_t b = a + 1; b < j; ++b)
                    if (table[a].second != table[b].second)
                        pairs.emplace_back(std::min(table[a].second, table[b].second),
                                           std::max(table[a].second, table[b].second));
            i = j;
        }
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    return pairs;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> lsh_candidates(
    std::span<const std::optional<MinHashSignature>> signatures, const LshParams& params, std::size_t workers) {
    LshIndex index(params);
    parallel_for(params.bands, workers, [&](std::size_t band) {
        for (std::size_t d = 0; d < signatures.size(); ++d)
            if (signatures[d]) index.insert_band(band, static_cast<std::uint32_t>(d), *signatures[d]);
    });
    return index.candidate_pairs();
}

std::size_t NearDuplicatePlan::removed() const {
    return static_cast<std::size_t>(std::count_if(absorbed_by.begin(), absorbed_by.end(), [](const auto& a) { return a.has_value(); }));
}

namespace {

template <typename Set>
NearDuplicatePlan resolve_pairs(std::size_t count, std::span<const std::pair<std::uint32_t, std::uint32_t>> pairs,
                                double threshold, const std::function<const Set&(std::uint32_t)>& shingles_of) {
    NearDuplicatePlan plan;
    plan.absorbed_by.assign(count, std::nullopt);
    plan.similarity.assign(count, 0.0);
    plan.candidate_pairs = pairs.size();

    // Earlier partners of each document, ascending.
    std::vector<std::vector<std::uint32_t>> earlier(count);
    for (const auto& [i, j] : pairs) earlier.at(j).push_back(i);

    for (std::uint32_t j = 0; j < count; ++j) {
        auto& partners = earlier[j];
        std::sort(partners.begin(), partners.end());
        for (std::uint32_t i : partners) {
            if (plan.absorbed_by[i]) continue;
            ++plan.verified_pairs;
            double sim = jaccard(shingles_of(i), shingles_of(j));
            if (sim >= threshold) {
                plan.absorbed_by[j] = i;
                plan.similarity[j] = sim;
                break;
            }
        }
    }
    return plan;
}

}  // namespace

NearDuplicatePlan resolve_candidates(std::size_t count,
                                     std::span<const std::pair<std::uint32_t, std::uint32_t>> pairs,
                                     double threshold,
                                     const std::function<const ShingleSet&(std::uint32_t)>& shingles_of) {
    return resolve_pairs(count, pairs, threshold, shingles_of);
}

NearDuplicatePlan resolve_candidates(std::size_t count,
                                     std::span<const std::pair<std::uint32_t, std::uint32_t>> pairs,
                                     double threshold,
                                     const std::function<const HashedShingles&(std::uint32_t)>& shingles_of) {
    return resolve_pairs(count, pairs, threshold, shingles_of);
}

std::vector<DuplicateCluster> clusters_from_plan(const NearDuplicatePlan& plan,
                                                 const std::function<std::string(std::uint32_t)>& id_of) {
    std::map<std::uint32_t, DuplicateCluster> by_kept;
    for (std::uint32_t j = 0; j < plan.absorbed_by.size(); ++j) {
        if (!plan.absorbed_by[j]) continue;
        auto& c = by_kept[*plan.absorbed_by[j]];
        c.removed_ids.push_back(id_of(j));
        c.similarities.push_back(plan.similarity[j]);
    }
    std::vector<DuplicateCluster> out;
    out.reserve(by_kept.size());
    for (auto& [kept, c] : by_kept) {
        c.kept_id = id_of(kept);
        out.push_back(std::move(c));
    }
    return out;
}

LshDedupResult lsh_near_dedup(std::vector<Document> docs, const LshParams& params, std::uint64_t seed,
                              std::size_t workers) {
    params.validate();
    const std::size_t n = docs.size();
    std::vector<ShingleSet> shingles(n);
    std::vector<std::optional<MinHashSignature>> sigs(n);
    const MinHasher hasher(params.num_perms, seed);
    parallel_for(n, workers, [&](std::size_t i) {
        shingles[i] = shingle(normalize_for_dedup(docs[i].joined_text()), params.shingle_size);
        if (!shingles[i].empty()) sigs[i] = hasher.signature(shingles[i]);
    });

    auto pairs = lsh_candidates(sigs, params, workers);
    auto plan = resolve_candidates(n, pairs, params.jaccard_threshold,
                                   [&](std::uint32_t i) -> const ShingleSet& { return shingles[i]; });

    LshDedupResult result;
    result.candidate_pairs = plan.candidate_pairs;
    result.clusters = clusters_from_plan(plan, [&](std::uint32_t i) {
        return docs[i].id.empty() ? "#" + std::to_string(i) : docs[i].id;
    });
    for (std::size_t i = 0; i < n; ++i)
        if (!plan.absorbed_by[i]) result.survivors.push_back(std::move(docs[i]));
    return result;
}

}  // namespace warcpipe
