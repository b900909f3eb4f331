#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "vx/core/error.hpp"

namespace vx {

/// 63-bit identifiers; negative values are reserved for invalid slots.
using idx_t = std::int64_t;

inline constexpr idx_t kInvalidId = -1;

/// Row-major matrix of n float vectors of dimension d.
struct VectorSet {
    size_t n = 0;
    size_t d = 0;
    std::vector<float> data;

    VectorSet() = default;

    VectorSet(size_t n_, size_t d_) : n(n_), d(d_), data(n_ * d_, 0.0f) {
        detail::require_arg(d_ >= 1, "VectorSet dimension must be >= 1");
    }

    VectorSet(size_t n_, size_t d_, std::vector<float> values)
        : n(n_), d(d_), data(std::move(values)) {
        detail::require_arg(d_ >= 1, "VectorSet dimension must be >= 1");
        detail::require_arg(data.size() == n * d, "VectorSet data length must equal n*d");
    }

    static VectorSet single(std::span<const float> v) {
        return VectorSet(1, v.size(), std::vector<float>(v.begin(), v.end()));
    }

    std::span<const float> row(size_t i) const { return {data.data() + i * d, d}; }
    std::span<float> row(size_t i) { return {data.data() + i * d, d}; }
    const float* ptr(size_t i) const { return data.data() + i * d; }
    float* ptr(size_t i) { return data.data() + i * d; }

    bool empty() const { return n == 0; }

    /// Copy of rows [begin, end).
    VectorSet slice(size_t begin, size_t end) const {
        detail::require_arg(begin <= end && end <= n, "VectorSet::slice out of range");
        return VectorSet(end - begin, d,
                         std::vector<float>(data.begin() + begin * d, data.begin() + end * d));
    }

    void append(std::span<const float> v) {
        detail::require_dim(v.size(), d, "VectorSet::append");
        data.insert(data.end(), v.begin(), v.end());
        ++n;
    }

    friend bool operator==(const VectorSet&, const VectorSet&) = default;
};

/// Per-query ranked results, padded with kInvalidId.
struct SearchResult {
    size_t nq = 0;
    size_t k = 0;
    std::vector<idx_t> ids;
    std::vector<float> distances;

    SearchResult() = default;
    SearchResult(size_t nq_, size_t k_, float pad_distance)
        : nq(nq_), k(k_), ids(nq_ * k_, kInvalidId), distances(nq_ * k_, pad_distance) {}

    std::span<const idx_t> ids_of(size_t q) const { return {ids.data() + q * k, k}; }
    std::span<idx_t> ids_of(size_t q) { return {ids.data() + q * k, k}; }
    std::span<const float> distances_of(size_t q) const { return {distances.data() + q * k, k}; }
    std::span<float> distances_of(size_t q) { return {distances.data() + q * k, k}; }

    friend bool operator==(const SearchResult&, const SearchResult&) = default;
};

/// Variable-length range-search results in CSR layout: query q owns
/// entries [lims[q], lims[q+1]).
struct RangeResult {
    size_t nq = 0;
    float radius = 0.0f;
    std::vector<size_t> lims;
    std::vector<idx_t> ids;
    std::vector<float> distances;

    RangeResult() = default;
    RangeResult(size_t nq_, float radius_) : nq(nq_), radius(radius_), lims(nq_ + 1, 0) {}

    size_t size_of(size_t q) const { return lims[q + 1] - lims[q]; }
    std::span<const idx_t> ids_of(size_t q) const {
        return {ids.data() + lims[q], size_of(q)};
    }
    std::span<const float> distances_of(size_t q) const {
        return {distances.data() + lims[q], size_of(q)};
    }

    friend bool operator==(const RangeResult&, const RangeResult&) = default;
};

} // namespace vx
