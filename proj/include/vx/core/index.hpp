#pragma once

#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "vx/core/error.hpp"
#include "vx/core/metric.hpp"
#include "vx/core/selector.hpp"
#include "vx/core/serialize.hpp"
#include "vx/core/types.hpp"

namespace vx {

/// Per-call overrides. Zero means "use the index default".
struct SearchParams {
    size_t nprobe = 0;
    size_t ef_search = 0;
    size_t shortlist = 0;
    const IdSelector* selector = nullptr;
};

/// Common contract of every float-vector index.
class Index {
public:
    Index(size_t d, Metric metric) : d_(d), metric_(metric) {
        detail::require_arg(d >= 1, "index dimension must be >= 1");
        metric.validate();
    }
    virtual ~Index() = default;

    Index(const Index&) = delete;
    Index& operator=(const Index&) = delete;

    size_t d() const { return d_; }
    Metric metric() const { return metric_; }
    size_t ntotal() const { return ntotal_; }
    bool is_trained() const { return is_trained_; }

    virtual void train(const VectorSet& /*x*/) {}

    /// Adds vectors numbered sequentially from ntotal().
    void add(const VectorSet& x) {
        std::vector<idx_t> ids(x.n);
        std::iota(ids.begin(), ids.end(), static_cast<idx_t>(ntotal_));
        add_with_ids(x, ids);
    }

    virtual void add_with_ids(const VectorSet& x, std::span<const idx_t> ids) = 0;

    virtual SearchResult search(const VectorSet& q, size_t k,
                                const SearchParams& params = {}) const = 0;

    virtual RangeResult range_search(const VectorSet& /*q*/, float /*radius*/,
                                     const SearchParams& /*params*/ = {}) const {
        throw Error(ErrorKind::Unsupported, type_name() + " does not support range search");
    }

    virtual size_t remove_ids(std::span<const idx_t> /*ids*/) {
        throw Error(ErrorKind::Unsupported, type_name() + " does not support removal");
    }

    virtual std::vector<float> reconstruct(idx_t /*id*/) const {
        throw Error(ErrorKind::Unsupported, type_name() + " does not support reconstruction");
    }

    VectorSet reconstruct_batch(std::span<const idx_t> ids) const {
        VectorSet out(ids.size(), d_);
        for (size_t i = 0; i < ids.size(); ++i) {
            auto v = reconstruct(ids[i]);
            std::copy(v.begin(), v.end(), out.ptr(i));
        }
        return out;
    }

    virtual void reset() = 0;

    /// Serializes the index as one tagged section (see factory/index_io.hpp).
    virtual void write(ByteWriter& w) const = 0;

    virtual std::string type_name() const = 0;

protected:
    void check_searchable(const VectorSet& q, size_t k) const {
        detail::require(is_trained_, ErrorKind::NotTrained, type_name() + " must be trained before search");
        detail::require_dim(q.d, d_, "search");
        detail::require_arg(k >= 1, "search requires k >= 1");
    }

    void check_addable(const VectorSet& x, std::span<const idx_t> ids) const {
        detail::require(is_trained_, ErrorKind::NotTrained, type_name() + " must be trained before add");
        detail::require_dim(x.d, d_, "add");
        detail::require_arg(ids.size() == x.n, "add_with_ids: one id per vector required");
        for (idx_t id : ids) detail::require_arg(id >= 0, "ids must be non-negative");
    }

    size_t d_;
    Metric metric_;
    size_t ntotal_ = 0;
    bool is_trained_ = true;
};

/// Reads one serialized index section of any type; composite indexes use it
/// to load their children.
using SectionReader = std::function<std::unique_ptr<Index>(ByteReader&)>;

} // namespace vx
