#pragma once

#include <algorithm>
#include <unordered_set>
#include <utility>
#include <vector>

#include "vx/core/error.hpp"
#include "vx/core/types.hpp"

namespace vx {

/// n-recall@k: mean over queries of the fraction of the first n ground-truth
/// ids found among the first k result ids.
inline double knn_recall(const SearchResult& result, const SearchResult& ground_truth, size_t n,
                         size_t k) {
    detail::require_arg(n >= 1, "knn_recall requires n >= 1");
    detail::require_arg(n <= k, "knn_recall requires n <= k");
    detail::require_arg(k <= result.k, "knn_recall: k exceeds the result width");
    detail::require_arg(n <= ground_truth.k, "knn_recall: ground truth has fewer than n entries");
    detail::require_arg(result.nq == ground_truth.nq, "knn_recall: query count mismatch");
    if (result.nq == 0) return 0.0;
    double total = 0.0;
    std::vector<idx_t> found;
    for (size_t q = 0; q < result.nq; ++q) {
        auto res = result.ids_of(q).first(k);
        found.assign(res.begin(), res.end());
        std::sort(found.begin(), found.end());
        size_t hits = 0;
        for (idx_t id : ground_truth.ids_of(q).first(n)) {
            if (id >= 0 && std::binary_search(found.begin(), found.end(), id)) ++hits;
        }
        total += static_cast<double>(hits) / static_cast<double>(n);
    }
    return total / static_cast<double>(result.nq);
}

struct PrecisionRecall {
    double precision;
    double recall;
};

/// Precision and recall of `approx` against `exact`, pooled over queries.
/// An empty approximate result has precision 1.
inline PrecisionRecall range_precision_recall(const RangeResult& approx, const RangeResult& exact) {
    detail::require_arg(approx.nq == exact.nq, "range result query count mismatch");
    size_t inter = 0, n_approx = 0, n_exact = 0;
    for (size_t q = 0; q < exact.nq; ++q) {
        std::unordered_set<idx_t> truth(exact.ids_of(q).begin(), exact.ids_of(q).end());
        n_exact += truth.size();
        n_approx += approx.size_of(q);
        for (idx_t id : approx.ids_of(q)) inter += truth.count(id);
    }
    detail::require_arg(n_exact > 0, "range ground truth is empty for every query");
    double p = n_approx ? static_cast<double>(inter) / static_cast<double>(n_approx) : 1.0;
    double r = static_cast<double>(inter) / static_cast<double>(n_exact);
    return {p, r};
}

/// Area under the precision-recall curve traced by results at swept
/// thresholds. Points are ordered by recall, the curve starts at recall 0 with
/// the first point's precision, and segments are integrated with the
/// trapezoid rule.
inline double range_search_map(const std::vector<RangeResult>& swept, const RangeResult& exact) {
    detail::require_arg(!swept.empty(), "range_search_map needs at least one threshold");
    std::vector<PrecisionRecall> pts;
    pts.reserve(swept.size());
    for (const auto& r : swept) pts.push_back(range_precision_recall(r, exact));
    std::stable_sort(pts.begin(), pts.end(),
                     [](const auto& a, const auto& b) { return a.recall < b.recall; });
    double area = 0.0;
    double prev_r = 0.0;
    double prev_p = pts.front().precision;
    for (const auto& pt : pts) {
        area += (pt.recall - prev_r) * 0.5 * (pt.precision + prev_p);
        prev_r = pt.recall;
        prev_p = pt.precision;
    }
    return area;
}

} // namespace vx
