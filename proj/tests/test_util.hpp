#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "vx/core/distance.hpp"
#include "vx/core/rng.hpp"
#include "vx/core/topk.hpp"
#include "vx/core/types.hpp"

namespace vxt {

using vx::idx_t;
using vx::VectorSet;

inline VectorSet gaussian(size_t n, size_t d, std::uint64_t seed, float scale = 1.0f) {
    VectorSet x(n, d);
    vx::Rng rng(seed);
    std::normal_distribution<float> g(0.0f, scale);
    for (float& v : x.data) v = g(rng);
    return x;
}

inline VectorSet uniform(size_t n, size_t d, std::uint64_t seed, float lo = 0.0f, float hi = 1.0f) {
    VectorSet x(n, d);
    vx::Rng rng(seed);
    std::uniform_real_distribution<float> u(lo, hi);
    for (float& v : x.data) v = u(rng);
    return x;
}

/// Naive double loop: full sort of every distance, ties by id.
inline vx::SearchResult naive_knn(const VectorSet& db, const VectorSet& q, size_t k, vx::Metric m) {
    vx::SearchResult r(q.n, k, m.worst_value());
    for (size_t i = 0; i < q.n; ++i) {
        std::vector<std::pair<float, idx_t>> all;
        for (size_t j = 0; j < db.n; ++j) {
            all.push_back({vx::distance_unchecked(q.ptr(i), db.ptr(j), db.d, m), static_cast<idx_t>(j)});
        }
        std::sort(all.begin(), all.end(), [&](const auto& a, const auto& b) {
            if (a.first != b.first) return m.higher_is_better() ? a.first > b.first : a.first < b.first;
            return a.second < b.second;
        });
        for (size_t t = 0; t < std::min(k, all.size()); ++t) {
            r.ids_of(i)[t] = all[t].second;
            r.distances_of(i)[t] = all[t].first;
        }
    }
    return r;
}

inline double mse(const VectorSet& a, const VectorSet& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        double e = static_cast<double>(a.data[i]) - b.data[i];
        s += e * e;
    }
    return s / static_cast<double>(a.n);
}

} // namespace vxt
