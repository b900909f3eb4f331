#pragma once

#include <algorithm>
#include <optional>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "vx/core/distance.hpp"
#include "vx/core/index.hpp"
#include "vx/core/metric_io.hpp"
#include "vx/core/parallel.hpp"
#include "vx/core/topk.hpp"

namespace vx {

/// Exact brute-force index over uncompressed vectors. Supports every metric;
/// L2 and inner-product batches at or above `blas_threshold` queries go
/// through a blocked matrix-multiplication kernel.
class FlatIndex : public Index {
public:
    static constexpr size_t kDefaultBlasThreshold = 20;

    size_t blas_threshold = kDefaultBlasThreshold;

    explicit FlatIndex(size_t d, Metric metric = Metric::l2()) : Index(d, metric) {}

    std::string type_name() const override { return "FlatIndex"; }

    void add_with_ids(const VectorSet& x, std::span<const idx_t> ids) override {
        check_addable(x, ids);
        bool stays_sequential = !explicit_ids_;
        for (size_t i = 0; i < ids.size() && stays_sequential; ++i) {
            stays_sequential = ids[i] == static_cast<idx_t>(ntotal_ + i);
        }
        if (!stays_sequential && !explicit_ids_) materialize_ids();
        if (explicit_ids_) {
            for (size_t i = 0; i < ids.size(); ++i) {
                detail::require_arg(!row_of_.contains(ids[i]),
                                    "duplicate id " + std::to_string(ids[i]));
                row_of_.emplace(ids[i], ntotal_ + i);
                ids_.push_back(ids[i]);
            }
        }
        data_.insert(data_.end(), x.data.begin(), x.data.end());
        if (uses_norms()) {
            for (size_t i = 0; i < x.n; ++i) norms_.push_back(squared_norm(x.ptr(i), d_));
        }
        ntotal_ += x.n;
    }

    SearchResult search(const VectorSet& q, size_t k, const SearchParams& params = {}) const override {
        if (uses_norms() && q.n >= blas_threshold) return search_blas(q, k, params);
        return search_direct(q, k, params);
    }

    /// One distance evaluation per (query, stored vector) pair.
    SearchResult search_direct(const VectorSet& q, size_t k, const SearchParams& params = {}) const {
        check_searchable(q, k);
        SearchResult out(q.n, k, metric_.worst_value());
        const bool hib = metric_.higher_is_better();
        const IdSelector* sel = params.selector;
        // Tiled so a block of stored rows stays in cache across a block of
        // queries; each query still visits rows in order.
        constexpr size_t kQueryBlock = 32;
        const size_t db_block = std::max<size_t>(1, (64 * 1024) / (std::max<size_t>(d_, 1) * sizeof(float)));
        dispatch_metric(metric_.kind, [&](auto kind) {
            constexpr MetricKind K = decltype(kind)::value;
            size_t nqb = (q.n + kQueryBlock - 1) / kQueryBlock;
            parallel_for(nqb, [&](size_t b) {
                size_t q0 = b * kQueryBlock, q1 = std::min(q.n, q0 + kQueryBlock);
                std::vector<TopKHeap> heaps;
                heaps.reserve(q1 - q0);
                for (size_t qi = q0; qi < q1; ++qi) heaps.emplace_back(k, hib);
                for (size_t x0 = 0; x0 < ntotal_; x0 += db_block) {
                    size_t x1 = std::min(ntotal_, x0 + db_block);
                    for (size_t qi = q0; qi < q1; ++qi) {
                        TopKHeap& heap = heaps[qi - q0];
                        const float* qv = q.ptr(qi);
                        for (size_t i = x0; i < x1; ++i) {
                            idx_t id = label(i);
                            if (sel && !sel->is_member(id)) continue;
                            heap.push(distance_kernel<K>(qv, row_ptr(i), d_, metric_.arg), id);
                        }
                    }
                }
                for (size_t qi = q0; qi < q1; ++qi) {
                    heaps[qi - q0].write_sorted(out.ids_of(qi), out.distances_of(qi), metric_.worst_value());
                }
            });
        });
        return out;
    }

    /// Uses ||q - x||^2 = ||q||^2 + ||x||^2 - 2<q, x> with a blocked GEMM for
    /// the inner products. Unsupported metrics fall back to search_direct.
    SearchResult search_blas(const VectorSet& q, size_t k, const SearchParams& params = {}) const {
        if (!uses_norms()) return search_direct(q, k, params);
        check_searchable(q, k);
        using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
        constexpr size_t kQueryBlock = 256;
        constexpr size_t kDbBlock = 4096;
        const bool l2 = metric_.kind == MetricKind::L2;
        const bool hib = metric_.higher_is_better();
        const IdSelector* sel = params.selector;
        SearchResult out(q.n, k, metric_.worst_value());

        size_t nqb = (q.n + kQueryBlock - 1) / kQueryBlock;
        parallel_for(nqb, [&](size_t b) {
            size_t q0 = b * kQueryBlock;
            size_t q1 = std::min(q.n, q0 + kQueryBlock);
            size_t bq = q1 - q0;
            std::vector<TopKHeap> heaps;
            heaps.reserve(bq);
            std::vector<float> qnorm(bq);
            for (size_t i = 0; i < bq; ++i) {
                heaps.emplace_back(k, hib);
                qnorm[i] = squared_norm(q.ptr(q0 + i), d_);
            }
            Eigen::Map<const RowMat> Q(q.ptr(q0), static_cast<Eigen::Index>(bq),
                                       static_cast<Eigen::Index>(d_));
            RowMat ip;
            for (size_t x0 = 0; x0 < ntotal_; x0 += kDbBlock) {
                size_t x1 = std::min(ntotal_, x0 + kDbBlock);
                Eigen::Map<const RowMat> X(row_ptr(x0), static_cast<Eigen::Index>(x1 - x0),
                                           static_cast<Eigen::Index>(d_));
                ip.noalias() = Q * X.transpose();
                for (size_t i = 0; i < bq; ++i) {
                    const float* row = ip.data() + i * (x1 - x0);
                    for (size_t j = x0; j < x1; ++j) {
                        idx_t id = label(j);
                        if (sel && !sel->is_member(id)) continue;
                        float v = row[j - x0];
                        if (l2) v = std::max(0.0f, qnorm[i] + norms_[j] - 2.0f * v);
                        heaps[i].push(v, id);
                    }
                }
            }
            for (size_t i = 0; i < bq; ++i) {
                heaps[i].write_sorted(out.ids_of(q0 + i), out.distances_of(q0 + i),
                                      metric_.worst_value());
            }
        });
        return out;
    }

    /// All stored vectors with distance <= radius (>= radius for
    /// similarities), best-first per query.
    RangeResult range_search(const VectorSet& q, float radius, const SearchParams& params = {}) const override {
        check_searchable(q, 1);
        const bool hib = metric_.higher_is_better();
        if (!hib) detail::require_arg(radius >= 0.0f, "range search radius must be >= 0");
        const IdSelector* sel = params.selector;
        std::vector<std::vector<ScoredId>> per_query(q.n);
        dispatch_metric(metric_.kind, [&](auto kind) {
            constexpr MetricKind K = decltype(kind)::value;
            parallel_for(q.n, [&](size_t qi) {
                auto& hits = per_query[qi];
                for (size_t i = 0; i < ntotal_; ++i) {
                    idx_t id = label(i);
                    if (sel && !sel->is_member(id)) continue;
                    float v = distance_kernel<K>(q.ptr(qi), row_ptr(i), d_, metric_.arg);
                    if (hib ? v >= radius : v <= radius) hits.push_back({v, id});
                }
                std::sort(hits.begin(), hits.end(), BetterThan{hib});
            });
        });
        return pack_range(per_query, radius);
    }

    size_t remove_ids(std::span<const idx_t> ids) override {
        std::unordered_map<idx_t, bool> doomed;
        for (idx_t id : ids) doomed[id] = true;
        if (!explicit_ids_) materialize_ids();
        size_t kept = 0;
        for (size_t i = 0; i < ntotal_; ++i) {
            if (doomed.contains(ids_[i])) continue;
            if (kept != i) {
                std::copy(row_ptr(i), row_ptr(i) + d_, data_.begin() + kept * d_);
                ids_[kept] = ids_[i];
                if (uses_norms()) norms_[kept] = norms_[i];
            }
            ++kept;
        }
        size_t removed = ntotal_ - kept;
        ntotal_ = kept;
        data_.resize(kept * d_);
        ids_.resize(kept);
        if (uses_norms()) norms_.resize(kept);
        rebuild_row_map();
        return removed;
    }

    std::vector<float> reconstruct(idx_t id) const override {
        auto row = row_of(id);
        detail::require(row.has_value(), ErrorKind::NotFound, "id " + std::to_string(id) + " not stored");
        return {row_ptr(*row), row_ptr(*row) + d_};
    }

    std::optional<size_t> row_of(idx_t id) const {
        if (!explicit_ids_) {
            if (id < 0 || static_cast<size_t>(id) >= ntotal_) return std::nullopt;
            return static_cast<size_t>(id);
        }
        auto it = row_of_.find(id);
        if (it == row_of_.end()) return std::nullopt;
        return it->second;
    }

    void reset() override {
        data_.clear();
        norms_.clear();
        ids_.clear();
        row_of_.clear();
        explicit_ids_ = false;
        ntotal_ = 0;
    }

    const float* row_ptr(size_t row) const { return data_.data() + row * d_; }
    idx_t label(size_t row) const { return explicit_ids_ ? ids_[row] : static_cast<idx_t>(row); }
    std::span<const float> vectors() const { return data_; }
    std::span<const float> norms() const { return norms_; }
    bool has_explicit_ids() const { return explicit_ids_; }

    void write(ByteWriter& w) const override {
        w.section("FLAT", [&](ByteWriter& s) {
            s.put<std::uint64_t>(d_);
            detail::write_metric(s, metric_);
            s.put<std::uint64_t>(ntotal_);
            s.put<std::uint64_t>(blas_threshold);
            s.put<std::uint8_t>(explicit_ids_ ? 1 : 0);
            s.put_vector(data_);
            s.put_vector(ids_);
        });
    }

    static std::unique_ptr<FlatIndex> read_body(ByteReader& r) {
        auto d = r.get<std::uint64_t>();
        Metric m = detail::read_metric(r);
        auto n = r.get<std::uint64_t>();
        auto idx = std::make_unique<FlatIndex>(d, m);
        idx->blas_threshold = r.get<std::uint64_t>();
        bool explicit_ids = r.get<std::uint8_t>() != 0;
        auto data = r.get_vector<float>();
        auto ids = r.get_vector<idx_t>();
        if (data.size() != n * d || (explicit_ids && ids.size() != n)) {
            throw Error(ErrorKind::Format, "flat index payload size mismatch");
        }
        VectorSet x(n, d, std::move(data));
        if (explicit_ids) {
            idx->add_with_ids(x, ids);
        } else if (n) {
            idx->add(x);
        }
        return idx;
    }

private:
    bool uses_norms() const {
        return metric_.kind == MetricKind::L2 || metric_.kind == MetricKind::InnerProduct;
    }

    void materialize_ids() {
        ids_.resize(ntotal_);
        for (size_t i = 0; i < ntotal_; ++i) ids_[i] = static_cast<idx_t>(i);
        explicit_ids_ = true;
        rebuild_row_map();
    }

    void rebuild_row_map() {
        row_of_.clear();
        for (size_t i = 0; i < ids_.size(); ++i) row_of_.emplace(ids_[i], i);
    }

    static RangeResult pack_range(const std::vector<std::vector<ScoredId>>& per_query, float radius) {
        RangeResult out(per_query.size(), radius);
        for (size_t qi = 0; qi < per_query.size(); ++qi) {
            for (const auto& e : per_query[qi]) {
                out.ids.push_back(e.id);
                out.distances.push_back(e.distance);
            }
            out.lims[qi + 1] = out.ids.size();
        }
        return out;
    }

    std::vector<float> data_;
    std::vector<float> norms_;
    std::vector<idx_t> ids_;
    std::unordered_map<idx_t, size_t> row_of_;
    bool explicit_ids_ = false;
};

} // namespace vx
