#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "vx/core/distance.hpp"
#include "vx/core/index.hpp"
#include "vx/core/rng.hpp"
#include "vx/core/topk.hpp"
#include "vx/quantize/bits.hpp"

namespace vx {

using WordSet = std::vector<std::uint32_t>;

/// Item word rows and per-word posting lists of a corpus of N items over a
/// vocabulary of v words. Rows and postings are sorted ascending.
class WordPostings {
public:
    WordPostings(size_t vocab, std::vector<WordSet> item_words) : vocab_(vocab), rows_(std::move(item_words)) {
        postings_.resize(vocab);
        for (size_t i = 0; i < rows_.size(); ++i) {
            auto& row = rows_[i];
            std::sort(row.begin(), row.end());
            row.erase(std::unique(row.begin(), row.end()), row.end());
            for (auto w : row) {
                detail::require_arg(w < vocab, "word id " + std::to_string(w) + " outside the vocabulary");
                postings_[w].push_back(static_cast<idx_t>(i));
            }
        }
    }

    size_t vocab() const { return vocab_; }
    size_t n() const { return rows_.size(); }
    const WordSet& words_of(size_t item) const { return rows_[item]; }
    std::span<const idx_t> posting(std::uint32_t w) const { return postings_[w]; }
    size_t list_size(std::uint32_t w) const { return w < vocab_ ? postings_[w].size() : 0; }

    /// Exact predicate: every query word occurs in the item's row.
    bool contains_all(size_t item, std::span<const std::uint32_t> words) const {
        const auto& row = rows_[item];
        for (auto w : words) {
            if (!std::binary_search(row.begin(), row.end(), w)) return false;
        }
        return true;
    }

    /// Sorted intersection of the posting lists of `words`.
    std::vector<idx_t> intersect(std::span<const std::uint32_t> words) const {
        if (words.empty()) return {};
        for (auto w : words) {
            if (w >= vocab_) return {};
        }
        std::vector<std::uint32_t> order(words.begin(), words.end());
        std::sort(order.begin(), order.end(),
                  [&](auto a, auto b) { return postings_[a].size() < postings_[b].size(); });
        std::vector<idx_t> acc = postings_[order[0]];
        for (size_t i = 1; i < order.size() && !acc.empty(); ++i) {
            std::vector<idx_t> next;
            const auto& p = postings_[order[i]];
            std::set_intersection(acc.begin(), acc.end(), p.begin(), p.end(), std::back_inserter(next));
            acc = std::move(next);
        }
        return acc;
    }

private:
    size_t vocab_;
    std::vector<WordSet> rows_;
    std::vector<std::vector<idx_t>> postings_;
};

/// Per-word random bit signatures living in the high bits of 63-bit ids:
/// the low ceil(log2 N) bits hold the item id and the remaining
/// 63 - ceil(log2 N) bits hold the OR of the item's word signatures.
/// Signatures are stored unshifted, in bits [0, signature_bits).
class WordSignatureTable {
public:
    WordSignatureTable(size_t vocab, size_t n_items, double p = 0.1, std::uint64_t seed = 42)
        : id_bits_(std::max(1u, bits_for(std::max<size_t>(n_items, 2)))), p_(p), seed_(seed), sig_(vocab, 0) {
        detail::require_arg(id_bits_ < 63, "too many items for composite ids");
        detail::require_arg(p >= 0.0 && p <= 1.0, "signature bit probability must be in [0, 1]");
        Rng rng(seed);
        std::bernoulli_distribution bit(p);
        for (auto& s : sig_) {
            for (unsigned b = 0; b < signature_bits(); ++b) {
                if (bit(rng)) s |= std::uint64_t{1} << b;
            }
        }
    }

    size_t vocab() const { return sig_.size(); }
    unsigned id_bits() const { return id_bits_; }
    unsigned signature_bits() const { return 63 - id_bits_; }
    double p() const { return p_; }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t id_mask() const { return (std::uint64_t{1} << id_bits_) - 1; }

    std::uint64_t signature(std::uint32_t w) const { return sig_.at(w); }

    void set_signature(std::uint32_t w, std::uint64_t s) {
        detail::require_arg(w < sig_.size(), "word id outside the vocabulary");
        detail::require_arg((s >> signature_bits()) == 0, "signature exceeds the available bits");
        sig_[w] = s;
    }

    std::uint64_t signature_of(std::span<const std::uint32_t> words) const {
        std::uint64_t s = 0;
        for (auto w : words) s |= signature(w);
        return s;
    }

    idx_t id_of(idx_t composite) const { return static_cast<idx_t>(static_cast<std::uint64_t>(composite) & id_mask()); }
    std::uint64_t signature_of_composite(idx_t composite) const {
        return static_cast<std::uint64_t>(composite) >> id_bits_;
    }

private:
    unsigned id_bits_;
    double p_;
    std::uint64_t seed_;
    std::vector<std::uint64_t> sig_;
};

inline idx_t pack_id_signature(idx_t id, std::span<const std::uint32_t> words, const WordSignatureTable& table) {
    detail::require_arg(id >= 0 && static_cast<std::uint64_t>(id) <= table.id_mask(),
                        "id " + std::to_string(id) + " exceeds the " + std::to_string(table.id_bits()) + "-bit id budget");
    return static_cast<idx_t>((table.signature_of(words) << table.id_bits()) | static_cast<std::uint64_t>(id));
}

/// False means the query words are certainly not all present.
inline bool signature_prefilter(std::uint64_t s_q, std::uint64_t s_i) { return (~s_i & s_q) == 0; }

/// Selector over composite ids: the signature test first, then the exact
/// postings check for survivors.
class WordQuerySelector : public IdSelector {
public:
    WordQuerySelector(const WordSignatureTable& table, const WordPostings& postings, WordSet words)
        : table_(table), postings_(postings), words_(std::move(words)), s_q_(table.signature_of(words_)) {}

    bool is_member(idx_t composite) const override {
        if (!signature_prefilter(s_q_, table_.signature_of_composite(composite))) return false;
        auto id = table_.id_of(composite);
        return static_cast<size_t>(id) < postings_.n() && postings_.contains_all(static_cast<size_t>(id), words_);
    }

private:
    const WordSignatureTable& table_;
    const WordPostings& postings_;
    WordSet words_;
    std::uint64_t s_q_;
};

enum class FilterPlanKind { VectorFirst, MetadataFirst, Empty };

struct FilterPlan {
    FilterPlanKind kind = FilterPlanKind::VectorFirst;
    /// Estimated number of matching items.
    double estimate = 0.0;
    /// Exact matches, filled for MetadataFirst.
    std::vector<idx_t> candidates;
};

inline constexpr double kDefaultPlanThreshold = 3e-4;

/// One word estimates S = L_w, two words S = L1*L2/N; the metadata-first
/// plan runs when S/N < threshold. Three or more words go vector-first.
inline FilterPlan plan_filtered_query(std::span<const std::uint32_t> words_in, const WordPostings& postings,
                                      double threshold = kDefaultPlanThreshold) {
    detail::require_arg(!words_in.empty(), "filtered query needs at least one word");
    WordSet words(words_in.begin(), words_in.end());
    std::sort(words.begin(), words.end());
    words.erase(std::unique(words.begin(), words.end()), words.end());
    FilterPlan plan;
    for (auto w : words) {
        if (w >= postings.vocab() || postings.list_size(w) == 0) {
            plan.kind = FilterPlanKind::Empty;
            return plan;
        }
    }
    const double n = static_cast<double>(postings.n());
    if (words.size() == 1) {
        plan.estimate = static_cast<double>(postings.list_size(words[0]));
    } else if (words.size() == 2) {
        plan.estimate = static_cast<double>(postings.list_size(words[0])) *
                        static_cast<double>(postings.list_size(words[1])) / n;
    } else {
        plan.estimate = n;
        return plan;
    }
    if (plan.estimate / n < threshold) {
        plan.kind = FilterPlanKind::MetadataFirst;
        plan.candidates = postings.intersect(words);
    }
    return plan;
}

/// Brute force over the candidate rows of `base`; row i holds item i.
inline SearchResult metadata_first_search(const VectorSet& base, Metric metric, const VectorSet& q, size_t k,
                                          std::span<const idx_t> candidates) {
    detail::require_dim(q.d, base.d, "metadata-first search");
    SearchResult out(q.n, k, metric.worst_value());
    for (size_t qi = 0; qi < q.n; ++qi) {
        TopKHeap heap(k, metric.higher_is_better());
        for (idx_t c : candidates) heap.push(distance_unchecked(q.ptr(qi), base.ptr(c), base.d, metric), c);
        heap.write_sorted(out.ids_of(qi), out.distances_of(qi), metric.worst_value());
    }
    return out;
}

/// Index scan with the word selector; `index` stores composite ids, which
/// are masked back to item ids in the result.
inline SearchResult vector_first_search(const Index& index, const WordSignatureTable& table,
                                        const WordPostings& postings, const VectorSet& q, size_t k,
                                        std::span<const std::uint32_t> words, SearchParams params = {}) {
    WordQuerySelector sel(table, postings, WordSet(words.begin(), words.end()));
    params.selector = &sel;
    SearchResult r = index.search(q, k, params);
    for (auto& id : r.ids) {
        if (id >= 0) id = table.id_of(id);
    }
    return r;
}

/// Plans then runs one word-filtered query batch sharing the same words.
inline SearchResult filtered_word_search(const Index& index, const VectorSet& base, const WordSignatureTable& table,
                                         const WordPostings& postings, const VectorSet& q, size_t k,
                                         std::span<const std::uint32_t> words, SearchParams params = {},
                                         double threshold = kDefaultPlanThreshold, FilterPlan* plan_out = nullptr) {
    FilterPlan plan = plan_filtered_query(words, postings, threshold);
    SearchResult r;
    switch (plan.kind) {
        case FilterPlanKind::Empty: r = SearchResult(q.n, k, index.metric().worst_value()); break;
        case FilterPlanKind::MetadataFirst: r = metadata_first_search(base, index.metric(), q, k, plan.candidates); break;
        case FilterPlanKind::VectorFirst: r = vector_first_search(index, table, postings, q, k, words, params); break;
    }
    if (plan_out) *plan_out = std::move(plan);
    return r;
}

struct PrefilterStats {
    size_t non_matching = 0;
    /// Non-matching items the signature test let through.
    size_t false_passes = 0;

    /// Fraction of prefilter-true outcomes among non-matching candidates.
    double false_pass_rate() const {
        return non_matching ? static_cast<double>(false_passes) / static_cast<double>(non_matching) : 0.0;
    }
    /// Fraction of non-matching candidates the exact check is spared for.
    double rejection_rate() const { return non_matching ? 1.0 - false_pass_rate() : 0.0; }
};

/// Runs every query against every item of the corpus.
inline PrefilterStats prefilter_stats(const WordSignatureTable& table, const WordPostings& postings,
                                      std::span<const WordSet> queries) {
    std::vector<std::uint64_t> item_sig(postings.n());
    for (size_t i = 0; i < postings.n(); ++i) item_sig[i] = table.signature_of(postings.words_of(i));
    PrefilterStats st;
    for (const auto& qw : queries) {
        std::uint64_t s_q = table.signature_of(qw);
        for (size_t i = 0; i < postings.n(); ++i) {
            if (postings.contains_all(i, qw)) continue;
            ++st.non_matching;
            if (signature_prefilter(s_q, item_sig[i])) ++st.false_passes;
        }
    }
    return st;
}

inline double prefilter_hit_rate(const WordSignatureTable& table, const WordPostings& postings,
                                 std::span<const WordSet> queries) {
    return prefilter_stats(table, postings, queries).false_pass_rate();
}

} // namespace vx
