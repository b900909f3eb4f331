#pragma once

#include <memory>

#include "vx/core/distance.hpp"
#include "vx/core/index.hpp"
#include "vx/core/parallel.hpp"
#include "vx/core/topk.hpp"

namespace vx {

/// Two-stage search: `fast` proposes `shortlist` candidates per query, their
/// distances are recomputed against vectors reconstructed from `exact`, and
/// the best k are kept.
inline SearchResult refine_search(const Index& fast, const Index& exact, const VectorSet& q, size_t k,
                                  size_t shortlist, const SearchParams& params = {}) {
    detail::require_arg(k >= 1, "refine_search requires k >= 1");
    detail::require_arg(shortlist >= k, "refine_search requires shortlist >= k");
    detail::require_dim(q.d, exact.d(), "refine_search");
    SearchResult candidates = fast.search(q, shortlist, params);
    const Metric m = exact.metric();
    SearchResult out(q.n, k, m.worst_value());
    parallel_for(q.n, [&](size_t qi) {
        TopKHeap heap(k, m.higher_is_better());
        for (idx_t id : candidates.ids_of(qi)) {
            if (id < 0) continue;
            auto v = exact.reconstruct(id);
            heap.push(distance_unchecked(q.ptr(qi), v.data(), q.d, m), id);
        }
        heap.write_sorted(out.ids_of(qi), out.distances_of(qi), m.worst_value());
    });
    return out;
}

/// Index wrapper that re-ranks a base index's shortlist with exact
/// distances from a second index holding the same vectors under the same ids.
class RefineIndex : public Index {
public:
    /// Shortlist length as a multiple of k when the caller does not set one.
    size_t k_factor = 4;

    RefineIndex(std::unique_ptr<Index> base, std::unique_ptr<Index> exact)
        : Index(exact->d(), exact->metric()), base_(std::move(base)), exact_(std::move(exact)) {
        detail::require_dim(base_->d(), exact_->d(), "RefineIndex");
        is_trained_ = base_->is_trained();
        ntotal_ = base_->ntotal();
    }

    std::string type_name() const override { return "RefineIndex"; }

    const Index& base() const { return *base_; }
    Index& base() { return *base_; }
    const Index& exact() const { return *exact_; }

    void train(const VectorSet& x) override {
        base_->train(x);
        exact_->train(x);
        is_trained_ = base_->is_trained();
    }

    void add_with_ids(const VectorSet& x, std::span<const idx_t> ids) override {
        check_addable(x, ids);
        base_->add_with_ids(x, ids);
        exact_->add_with_ids(x, ids);
        ntotal_ = base_->ntotal();
    }

    SearchResult search(const VectorSet& q, size_t k, const SearchParams& params = {}) const override {
        check_searchable(q, k);
        size_t shortlist = params.shortlist ? params.shortlist : k * k_factor;
        return refine_search(*base_, *exact_, q, k, std::max(shortlist, k), params);
    }

    size_t remove_ids(std::span<const idx_t> ids) override {
        size_t n = base_->remove_ids(ids);
        exact_->remove_ids(ids);
        ntotal_ = base_->ntotal();
        return n;
    }

    std::vector<float> reconstruct(idx_t id) const override { return exact_->reconstruct(id); }

    void reset() override {
        base_->reset();
        exact_->reset();
        ntotal_ = 0;
    }

    void write(ByteWriter& w) const override {
        w.section("RFNE", [&](ByteWriter& s) {
            s.put<std::uint64_t>(k_factor);
            base_->write(s);
            exact_->write(s);
        });
    }

    static std::unique_ptr<RefineIndex> read_body(ByteReader& r, const SectionReader& read_child) {
        auto k_factor = r.get<std::uint64_t>();
        auto base = read_child(r);
        auto exact = read_child(r);
        auto idx = std::make_unique<RefineIndex>(std::move(base), std::move(exact));
        idx->k_factor = k_factor;
        return idx;
    }

private:
    std::unique_ptr<Index> base_;
    std::unique_ptr<Index> exact_;
};

} // namespace vx
