#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "vx/core/error.hpp"
#include "vx/core/types.hpp"

namespace vx {

struct ScoredId {
    float distance;
    idx_t id;
};

/// Strict total order on (distance, id): better distance first, then smaller
/// id. NaN distances rank after every finite or infinite value.
struct BetterThan {
    bool higher_is_better = false;

    bool operator()(const ScoredId& a, const ScoredId& b) const {
        bool an = std::isnan(a.distance);
        bool bn = std::isnan(b.distance);
        if (an != bn) return bn;
        if (!an && a.distance != b.distance) {
            return higher_is_better ? a.distance > b.distance : a.distance < b.distance;
        }
        return a.id < b.id;
    }
};

/// Bounded binary heap keeping the k best entries; the worst kept entry sits
/// at the top so rejection is one comparison.
class TopKHeap {
public:
    TopKHeap(size_t k, bool higher_is_better) : k_(k), better_{higher_is_better} {
        detail::require_arg(k >= 1, "top-k selection requires k >= 1");
        heap_.reserve(k);
    }

    size_t k() const { return k_; }
    size_t size() const { return heap_.size(); }
    bool full() const { return heap_.size() == k_; }

    bool would_accept(float distance, idx_t id) const {
        return !full() || better_(ScoredId{distance, id}, heap_.front());
    }

    bool push(float distance, idx_t id) {
        ScoredId e{distance, id};
        if (heap_.size() < k_) {
            heap_.push_back(e);
            std::push_heap(heap_.begin(), heap_.end(), better_);
            return true;
        }
        if (!better_(e, heap_.front())) return false;
        std::pop_heap(heap_.begin(), heap_.end(), better_);
        heap_.back() = e;
        std::push_heap(heap_.begin(), heap_.end(), better_);
        return true;
    }

    /// Writes the kept entries best-first, padding with kInvalidId / `pad`.
    void write_sorted(std::span<idx_t> ids, std::span<float> distances, float pad) const {
        std::vector<ScoredId> sorted = heap_;
        std::sort(sorted.begin(), sorted.end(), better_);
        for (size_t i = 0; i < ids.size(); ++i) {
            if (i < sorted.size()) {
                ids[i] = sorted[i].id;
                distances[i] = sorted[i].distance;
            } else {
                ids[i] = kInvalidId;
                distances[i] = pad;
            }
        }
    }

    std::vector<ScoredId> sorted() const {
        std::vector<ScoredId> s = heap_;
        std::sort(s.begin(), s.end(), better_);
        return s;
    }

private:
    size_t k_;
    BetterThan better_;
    std::vector<ScoredId> heap_;
};

/// Unordered buffer of capacity > k. When it fills up, the k best are
/// selected and the k-th becomes the admission threshold.
class Reservoir {
public:
    Reservoir(size_t k, size_t capacity, bool higher_is_better)
        : k_(k), capacity_(capacity), better_{higher_is_better} {
        detail::require_arg(k >= 1, "reservoir requires k >= 1");
        detail::require_arg(capacity > k, "reservoir capacity must exceed k");
        buffer_.reserve(capacity);
    }

    size_t k() const { return k_; }

    bool push(float distance, idx_t id) {
        ScoredId e{distance, id};
        if (has_threshold_ && !better_(e, threshold_)) return false;
        buffer_.push_back(e);
        if (buffer_.size() == capacity_) shrink();
        return true;
    }

    std::vector<ScoredId> sorted() const {
        std::vector<ScoredId> s = buffer_;
        size_t keep = std::min(k_, s.size());
        std::partial_sort(s.begin(), s.begin() + keep, s.end(), better_);
        s.resize(keep);
        return s;
    }

    void write_sorted(std::span<idx_t> ids, std::span<float> distances, float pad) const {
        auto s = sorted();
        for (size_t i = 0; i < ids.size(); ++i) {
            if (i < s.size()) {
                ids[i] = s[i].id;
                distances[i] = s[i].distance;
            } else {
                ids[i] = kInvalidId;
                distances[i] = pad;
            }
        }
    }

private:
    void shrink() {
        std::nth_element(buffer_.begin(), buffer_.begin() + (k_ - 1), buffer_.end(), better_);
        threshold_ = buffer_[k_ - 1];
        has_threshold_ = true;
        buffer_.resize(k_);
    }

    size_t k_;
    size_t capacity_;
    BetterThan better_;
    std::vector<ScoredId> buffer_;
    ScoredId threshold_{0.0f, 0};
    bool has_threshold_ = false;
};

struct Selection {
    std::vector<idx_t> ids;
    std::vector<float> distances;

    friend bool operator==(const Selection&, const Selection&) = default;
};

/// The k best values with their positions, best-first, ties by smaller
/// position, padded with -1 and the worst value.
inline Selection topk_select(std::span<const float> values, size_t k, bool higher_is_better) {
    TopKHeap heap(k, higher_is_better);
    for (size_t i = 0; i < values.size(); ++i) heap.push(values[i], static_cast<idx_t>(i));
    Selection out{std::vector<idx_t>(k), std::vector<float>(k)};
    heap.write_sorted(out.ids, out.distances,
                      higher_is_better ? -std::numeric_limits<float>::infinity()
                                       : std::numeric_limits<float>::infinity());
    return out;
}

/// Same contract as topk_select over a stream of (id, distance) pairs.
inline Selection reservoir_select(std::span<const std::pair<idx_t, float>> stream, size_t k,
                                  size_t capacity, bool higher_is_better) {
    detail::require_arg(capacity > k, "reservoir capacity must exceed k");
    Reservoir r(k, capacity, higher_is_better);
    for (auto [id, dist] : stream) r.push(dist, id);
    Selection out{std::vector<idx_t>(k), std::vector<float>(k)};
    r.write_sorted(out.ids, out.distances,
                   higher_is_better ? -std::numeric_limits<float>::infinity()
                                    : std::numeric_limits<float>::infinity());
    return out;
}

} // namespace vx
