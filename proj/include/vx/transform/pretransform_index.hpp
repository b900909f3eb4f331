#pragma once

#include <memory>
#include <vector>

#include "vx/core/index.hpp"
#include "vx/transform/linear_transform.hpp"

namespace vx {

/// Applies a chain of linear transforms to every vector before handing it to
/// the wrapped index. Untrained stages (PCA) are fitted in order during train().
class PreTransformIndex : public Index {
public:
    PreTransformIndex(std::vector<LinearTransform> chain, std::unique_ptr<Index> sub)
        : Index(chain.empty() ? sub->d() : chain.front().d_in(), sub->metric()),
          chain_(std::move(chain)), sub_(std::move(sub)) {
        size_t d = d_;
        for (const auto& t : chain_) {
            detail::require_dim(t.d_in(), d, "PreTransformIndex chain");
            d = t.d_out();
        }
        detail::require_dim(sub_->d(), d, "PreTransformIndex sub-index");
        refresh_state();
    }

    std::string type_name() const override { return "PreTransformIndex"; }

    const std::vector<LinearTransform>& chain() const { return chain_; }
    const Index& sub() const { return *sub_; }
    Index& sub() { return *sub_; }

    VectorSet apply_chain(const VectorSet& x) const {
        VectorSet cur = x;
        for (const auto& t : chain_) cur = t.apply(cur);
        return cur;
    }

    void train(const VectorSet& x) override {
        detail::require_dim(x.d, d_, "train");
        VectorSet cur = x;
        for (auto& t : chain_) {
            t.train(cur);
            cur = t.apply(cur);
        }
        sub_->train(cur);
        refresh_state();
    }

    void add_with_ids(const VectorSet& x, std::span<const idx_t> ids) override {
        check_addable(x, ids);
        sub_->add_with_ids(apply_chain(x), ids);
        ntotal_ = sub_->ntotal();
    }

    SearchResult search(const VectorSet& q, size_t k, const SearchParams& params = {}) const override {
        check_searchable(q, k);
        return sub_->search(apply_chain(q), k, params);
    }

    RangeResult range_search(const VectorSet& q, float radius, const SearchParams& params = {}) const override {
        check_searchable(q, 1);
        return sub_->range_search(apply_chain(q), radius, params);
    }

    size_t remove_ids(std::span<const idx_t> ids) override {
        size_t n = sub_->remove_ids(ids);
        ntotal_ = sub_->ntotal();
        return n;
    }

    std::vector<float> reconstruct(idx_t id) const override {
        VectorSet cur = VectorSet::single(sub_->reconstruct(id));
        for (auto it = chain_.rbegin(); it != chain_.rend(); ++it) cur = it->reverse(cur);
        return cur.data;
    }

    void reset() override {
        sub_->reset();
        ntotal_ = 0;
    }

    void write(ByteWriter& w) const override {
        w.section("PRET", [&](ByteWriter& s) {
            s.put<std::uint64_t>(chain_.size());
            for (const auto& t : chain_) t.write(s);
            sub_->write(s);
        });
    }

    static std::unique_ptr<PreTransformIndex> read_body(ByteReader& r, const SectionReader& read_child) {
        auto n = r.get<std::uint64_t>();
        if (n > r.remaining()) throw Error(ErrorKind::Format, "truncated stream");
        std::vector<LinearTransform> chain;
        for (std::uint64_t i = 0; i < n; ++i) chain.push_back(LinearTransform::read(r));
        auto sub = read_child(r);
        return std::make_unique<PreTransformIndex>(std::move(chain), std::move(sub));
    }

private:
    void refresh_state() {
        is_trained_ = sub_->is_trained();
        for (const auto& t : chain_) is_trained_ = is_trained_ && t.is_trained();
        ntotal_ = sub_->ntotal();
    }

    std::vector<LinearTransform> chain_;
    std::unique_ptr<Index> sub_;
};

} // namespace vx
