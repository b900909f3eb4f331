#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <vector>

#include "vx/core/distance.hpp"
#include "vx/core/index.hpp"
#include "vx/core/metric_io.hpp"
#include "vx/core/parallel.hpp"
#include "vx/core/topk.hpp"
#include "vx/flat/flat_index.hpp"
#include "vx/graph/hnsw.hpp"
#include "vx/ivf/direct_map.hpp"
#include "vx/ivf/inverted_lists.hpp"
#include "vx/quantize/codec.hpp"
#include "vx/quantize/codec_io.hpp"
#include "vx/quantize/kmeans.hpp"

namespace vx {

/// nlist * sum(s^2) / (sum s)^2: the expected scan-cost multiplier relative
/// to balanced lists when queries visit lists uniformly.
inline double imbalance_factor(std::span<const size_t> sizes) {
    detail::require_arg(!sizes.empty(), "imbalance factor needs at least one list");
    double sum = 0.0, sq = 0.0;
    for (size_t s : sizes) {
        sum += static_cast<double>(s);
        sq += static_cast<double>(s) * static_cast<double>(s);
    }
    detail::require_arg(sum > 0.0, "imbalance factor of an empty index is undefined");
    return static_cast<double>(sizes.size()) * sq / (sum * sum);
}

/// Expected distance count K + P*N/K of an IVF search with balanced lists.
inline double ivf_cost_model(double k_ivf, double p_ivf, double n) {
    detail::require_arg(k_ivf > 0 && p_ivf > 0 && n > 0, "cost model arguments must be positive");
    return k_ivf + p_ivf * n / k_ivf;
}

/// Grid value minimizing the cost model; ties go to the earlier entry.
inline size_t ivf_cost_argmin(std::span<const size_t> k_grid, double p_ivf, double n) {
    detail::require_arg(!k_grid.empty(), "empty K grid");
    size_t best = k_grid[0];
    double best_cost = ivf_cost_model(static_cast<double>(best), p_ivf, n);
    for (size_t k : k_grid) {
        double c = ivf_cost_model(static_cast<double>(k), p_ivf, n);
        if (c < best_cost) {
            best_cost = c;
            best = k;
        }
    }
    return best;
}

struct IvfStats {
    /// coarse_ndis + codes_scanned.
    size_t ndis = 0;
    size_t coarse_ndis = 0;
    /// Shadow counter incremented inside the scan loop.
    size_t codes_scanned = 0;
    size_t nlist_visited = 0;
    double imbalance_factor = 0.0;
};

struct BigBatchResult {
    SearchResult result;
    size_t chunks = 0;
    size_t peak_resident_bytes = 0;
};

/// Inverted-file index. The coarse quantizer is a flat or HNSW index over
/// nlist centroids; each list stores (id, code) pairs where the code encodes
/// the residual to the list centroid (by_residual) or the raw vector. A
/// null codec stores raw floats, which are never residual-encoded so that
/// reconstruction stays exact.
class IvfIndex : public Index {
public:
    enum class Coarse : std::uint8_t { Flat = 0, Hnsw = 1 };

    bool by_residual = true;
    bool spherical = false;
    size_t nprobe = 1;
    KMeansParams kmeans;

    IvfIndex(size_t d, size_t nlist, std::unique_ptr<Codec> codec = nullptr, Metric metric = Metric::l2(),
             Coarse coarse = Coarse::Flat, size_t hnsw_m = 32)
        : Index(d, metric), nlist_(nlist), coarse_kind_(coarse), hnsw_m_(hnsw_m) {
        detail::require_arg(nlist >= 1, "IVF requires nlist >= 1");
        if (codec) {
            detail::require_dim(codec->d(), d, "IVF codec");
            codec_ = std::move(codec);
        } else {
            codec_ = std::make_unique<RawCodec>(d);
            raw_ = true;
        }
        lists_ = std::make_unique<ArrayInvertedLists>(nlist, codec_->code_size());
        is_trained_ = false;
    }

    std::string type_name() const override { return "IvfIndex"; }

    size_t nlist() const { return nlist_; }
    Coarse coarse_kind() const { return coarse_kind_; }
    size_t hnsw_m() const { return hnsw_m_; }
    bool is_raw() const { return raw_; }
    bool residual_encoding() const { return by_residual && !raw_; }
    const Codec& codec() const { return *codec_; }
    Codec& codec() { return *codec_; }
    const VectorSet& centroids() const { return centroids_; }
    const Index& coarse() const { return *coarse_; }
    const InvertedLists& lists() const { return *lists_; }
    const DirectMap& direct_map() const { return direct_map_; }

    void set_direct_map(DirectMap::Mode mode) {
        DirectMap dm(mode);
        for (size_t l = 0; l < nlist_; ++l) {
            ListView v = lists_->read_list(l);
            for (size_t o = 0; o < v.size; ++o) dm.add(v.ids[o], l, o);
        }
        direct_map_ = std::move(dm);
    }

    /// Swaps in another list storage; only allowed while the index is empty.
    void set_inverted_lists(std::unique_ptr<InvertedLists> lists) {
        detail::require_arg(ntotal_ == 0, "inverted lists can only be replaced on an empty index");
        detail::require_arg(lists->nlist() == nlist_ && lists->code_size() == codec_->code_size(),
                            "inverted list shape does not match the index");
        lists_ = std::move(lists);
    }

    double imbalance() const {
        auto s = lists_->sizes();
        return imbalance_factor(s);
    }

    void train(const VectorSet& x) override {
        detail::require_dim(x.d, d_, "train");
        detail::require_arg(x.n >= nlist_, "IVF training needs at least nlist vectors (got " +
                                               std::to_string(x.n) + ", nlist " + std::to_string(nlist_) + ")");
        KMeansParams p = kmeans;
        p.spherical = spherical;
        auto km = kmeans_train(x, nlist_, p);
        set_centroids(std::move(km.centroids));
        if (!raw_) {
            if (residual_encoding()) codec_->train(residuals(x, assign(x)));
            else codec_->train(x);
        }
        is_trained_ = true;
    }

    /// Installs coarse centroids directly (the codec must then be trained
    /// separately unless it is raw).
    void set_centroids(VectorSet c) {
        detail::require_arg(c.n == nlist_ && c.d == d_, "centroids must be nlist x d");
        centroids_ = std::move(c);
        build_coarse();
    }

    void mark_trained() {
        detail::require(centroids_.n == nlist_ && codec_->is_trained(), ErrorKind::NotTrained,
                        "IVF centroids and codec must be set first");
        is_trained_ = true;
    }

    /// Nearest list of each vector.
    std::vector<idx_t> assign(const VectorSet& x) const {
        SearchParams p;
        auto r = coarse_search(x, 1, p, nullptr);
        return r.ids;
    }

    void add_with_ids(const VectorSet& x, std::span<const idx_t> ids) override {
        check_addable(x, ids);
        if (direct_map_.enabled()) {
            for (size_t i = 0; i < ids.size(); ++i) {
                detail::require_arg(!direct_map_.contains(ids[i]), "duplicate id " + std::to_string(ids[i]));
                for (size_t j = 0; j < i; ++j) {
                    detail::require_arg(ids[j] != ids[i], "duplicate id " + std::to_string(ids[i]));
                }
            }
        }
        auto lists = assign(x);
        auto codes = codec_->compute_codes(residual_encoding() ? residuals(x, lists) : x);
        const size_t cs = codec_->code_size();
        for (size_t i = 0; i < x.n; ++i) {
            size_t l = static_cast<size_t>(lists[i]);
            size_t off = lists_->append(l, ids[i], codes.data() + i * cs);
            direct_map_.add(ids[i], l, off);
        }
        ntotal_ += x.n;
    }

    SearchResult search(const VectorSet& q, size_t k, const SearchParams& params = {}) const override {
        return search_with_stats(q, k, params, nullptr);
    }

    SearchResult search_with_stats(const VectorSet& q, size_t k, const SearchParams& params,
                                   IvfStats* stats) const {
        check_searchable(q, k);
        const size_t np = effective_nprobe(params);
        size_t coarse_ndis = 0;
        SearchResult probes = coarse_search(q, np, params, &coarse_ndis);
        SearchResult out(q.n, k, metric_.worst_value());
        std::vector<size_t> scanned(q.n, 0), visited(q.n, 0);
        parallel_for(q.n, [&](size_t qi) {
            auto scanner = make_scanner();
            TopKHeap heap(k, metric_.higher_is_better());
            for (idx_t l : probes.ids_of(qi)) {
                if (l < 0) continue;
                ++visited[qi];
                scanner.set_list(q.ptr(qi), static_cast<size_t>(l));
                ListView v = lists_->read_list(static_cast<size_t>(l));
                for (size_t o = 0; o < v.size; ++o) {
                    if (params.selector && !params.selector->is_member(v.ids[o])) continue;
                    heap.push(scanner.distance(v.codes + o * scanner.code_size), v.ids[o]);
                    ++scanned[qi];
                }
            }
            heap.write_sorted(out.ids_of(qi), out.distances_of(qi), metric_.worst_value());
        });
        if (stats) {
            stats->coarse_ndis = coarse_ndis;
            for (size_t qi = 0; qi < q.n; ++qi) {
                stats->codes_scanned += scanned[qi];
                stats->nlist_visited += visited[qi];
            }
            stats->ndis = stats->coarse_ndis + stats->codes_scanned;
            stats->imbalance_factor = ntotal_ ? imbalance() : 0.0;
        }
        return out;
    }

    RangeResult range_search(const VectorSet& q, float radius, const SearchParams& params = {}) const override {
        check_searchable(q, 1);
        if (!metric_.higher_is_better()) detail::require_arg(radius >= 0.0f, "range search radius must be >= 0");
        const size_t np = effective_nprobe(params);
        SearchResult probes = coarse_search(q, np, params, nullptr);
        BetterThan better{metric_.higher_is_better()};
        std::vector<std::vector<ScoredId>> per(q.n);
        parallel_for(q.n, [&](size_t qi) {
            auto scanner = make_scanner();
            for (idx_t l : probes.ids_of(qi)) {
                if (l < 0) continue;
                scanner.set_list(q.ptr(qi), static_cast<size_t>(l));
                ListView v = lists_->read_list(static_cast<size_t>(l));
                for (size_t o = 0; o < v.size; ++o) {
                    if (params.selector && !params.selector->is_member(v.ids[o])) continue;
                    float dist = scanner.distance(v.codes + o * scanner.code_size);
                    bool inside = metric_.higher_is_better() ? dist >= radius : dist <= radius;
                    if (inside) per[qi].push_back({dist, v.ids[o]});
                }
            }
            std::sort(per[qi].begin(), per[qi].end(), better);
        });
        RangeResult out(q.n, radius);
        for (size_t qi = 0; qi < q.n; ++qi) {
            for (const auto& e : per[qi]) {
                out.ids.push_back(e.id);
                out.distances.push_back(e.distance);
            }
            out.lims[qi + 1] = out.ids.size();
        }
        return out;
    }

    /// Scans inverted lists one chunk at a time, a chunk being as many
    /// consecutive lists as fit in `budget_bytes`, and feeds per-query
    /// reservoirs. Produces the same results as search() with the same nprobe.
    BigBatchResult big_batch_search(const VectorSet& q, size_t k, size_t budget_bytes,
                                    const SearchParams& params = {}) const {
        check_searchable(q, k);
        size_t largest = 0;
        for (size_t l = 0; l < nlist_; ++l) largest = std::max(largest, lists_->list_bytes(l));
        detail::require_arg(budget_bytes >= largest, "chunk budget " + std::to_string(budget_bytes) +
                                                         " is smaller than the largest list (" +
                                                         std::to_string(largest) + " bytes)");
        const size_t np = effective_nprobe(params);
        SearchResult probes = coarse_search(q, np, params, nullptr);

        // Queries routed to each list.
        std::vector<std::vector<std::uint32_t>> routed(nlist_);
        for (size_t qi = 0; qi < q.n; ++qi) {
            for (idx_t l : probes.ids_of(qi)) {
                if (l >= 0) routed[static_cast<size_t>(l)].push_back(static_cast<std::uint32_t>(qi));
            }
        }

        const bool hib = metric_.higher_is_better();
        std::vector<Reservoir> res;
        res.reserve(q.n);
        for (size_t qi = 0; qi < q.n; ++qi) res.emplace_back(k, std::max<size_t>(2 * k, k + 1), hib);

        BigBatchResult out;
        const size_t cs = codec_->code_size();
        size_t begin = 0;
        while (begin < nlist_) {
            size_t end = begin, bytes = 0;
            while (end < nlist_ && bytes + lists_->list_bytes(end) <= budget_bytes) bytes += lists_->list_bytes(end++);

            // Load the chunk into a resident buffer.
            struct Loaded {
                std::vector<idx_t> ids;
                std::vector<std::uint8_t> codes;
            };
            std::vector<Loaded> chunk(end - begin);
            size_t resident = 0;
            for (size_t l = begin; l < end; ++l) {
                ListView v = lists_->read_list(l);
                chunk[l - begin].ids.assign(v.ids, v.ids + v.size);
                chunk[l - begin].codes.assign(v.codes, v.codes + v.size * cs);
                resident += v.size * (cs + sizeof(idx_t));
            }
            out.peak_resident_bytes = std::max(out.peak_resident_bytes, resident);

            // Per-query work inside the chunk, in list order.
            std::vector<std::vector<std::uint32_t>> work(q.n);
            for (size_t l = begin; l < end; ++l) {
                for (auto qi : routed[l]) work[qi].push_back(static_cast<std::uint32_t>(l));
            }
            parallel_for(q.n, [&](size_t qi) {
                if (work[qi].empty()) return;
                auto scanner = make_scanner();
                for (auto l : work[qi]) {
                    scanner.set_list(q.ptr(qi), l);
                    const Loaded& ld = chunk[l - begin];
                    for (size_t o = 0; o < ld.ids.size(); ++o) {
                        if (params.selector && !params.selector->is_member(ld.ids[o])) continue;
                        res[qi].push(scanner.distance(ld.codes.data() + o * cs), ld.ids[o]);
                    }
                }
            });
            ++out.chunks;
            begin = end;
        }

        out.result = SearchResult(q.n, k, metric_.worst_value());
        for (size_t qi = 0; qi < q.n; ++qi) {
            res[qi].write_sorted(out.result.ids_of(qi), out.result.distances_of(qi), metric_.worst_value());
        }
        return out;
    }

    std::vector<float> reconstruct(idx_t id) const override {
        auto slot = locate(id);
        detail::require(slot.has_value(), ErrorKind::NotFound, "id " + std::to_string(id) + " not stored");
        ListView v = lists_->read_list(slot->list);
        std::vector<float> out(d_);
        codec_->decode_one(v.codes + static_cast<size_t>(slot->offset) * codec_->code_size(), out.data());
        if (residual_encoding()) {
            const float* c = centroids_.ptr(slot->list);
            for (size_t j = 0; j < d_; ++j) out[j] += c[j];
        }
        return out;
    }

    /// Unknown ids are skipped; the return value counts removed entries.
    size_t remove_ids(std::span<const idx_t> ids) override {
        size_t removed = 0;
        for (idx_t id : ids) {
            auto slot = locate(id);
            if (!slot) continue;
            erase_slot(id, *slot);
            ++removed;
        }
        return removed;
    }

    /// Replaces the stored vectors of existing ids, moving each to the list
    /// of its new nearest centroid. Unknown ids are skipped.
    size_t update_vectors(std::span<const idx_t> ids, const VectorSet& x) {
        detail::require_dim(x.d, d_, "update_vectors");
        detail::require_arg(ids.size() == x.n, "update_vectors: one vector per id required");
        std::vector<idx_t> live;
        VectorSet fresh(0, d_);
        for (size_t i = 0; i < ids.size(); ++i) {
            auto slot = locate(ids[i]);
            if (!slot) continue;
            erase_slot(ids[i], *slot);
            live.push_back(ids[i]);
            fresh.append(x.row(i));
        }
        if (!live.empty()) add_with_ids(fresh, live);
        return live.size();
    }

    void reset() override {
        lists_->clear();
        direct_map_.clear();
        ntotal_ = 0;
    }

    void write(ByteWriter& w) const override {
        w.section("IVFX", [&](ByteWriter& s) {
            s.put<std::uint64_t>(d_);
            detail::write_metric(s, metric_);
            s.put<std::uint64_t>(nlist_);
            s.put<std::uint8_t>(static_cast<std::uint8_t>(coarse_kind_));
            s.put<std::uint64_t>(hnsw_m_);
            s.put<std::uint8_t>(by_residual ? 1 : 0);
            s.put<std::uint8_t>(spherical ? 1 : 0);
            s.put<std::uint64_t>(nprobe);
            s.put<std::uint8_t>(static_cast<std::uint8_t>(direct_map_.mode()));
            s.put<std::uint8_t>(is_trained_ ? 1 : 0);
            s.put<std::uint8_t>(raw_ ? 1 : 0);
            s.put<std::uint64_t>(kmeans.niter);
            s.put<std::uint64_t>(kmeans.seed);
            s.put<std::uint64_t>(kmeans.max_points_per_centroid);
            s.put<std::uint64_t>(ntotal_);
            s.put_vector(centroids_.data);
            s.put<std::uint8_t>(coarse_ ? 1 : 0);
            if (coarse_) coarse_->write(s);
            if (!raw_) codec_->write(s);
            ArrayInvertedLists copy(nlist_, codec_->code_size());
            const ArrayInvertedLists* al = dynamic_cast<const ArrayInvertedLists*>(lists_.get());
            if (!al) {
                for (size_t l = 0; l < nlist_; ++l) {
                    ListView v = lists_->read_list(l);
                    for (size_t o = 0; o < v.size; ++o) copy.append(l, v.ids[o], v.codes + o * codec_->code_size());
                }
                al = &copy;
            }
            al->write(s);
        });
    }

    static std::unique_ptr<IvfIndex> read_body(ByteReader& r, const SectionReader& read_child) {
        auto d = r.get<std::uint64_t>();
        Metric metric = detail::read_metric(r);
        auto nlist = r.get<std::uint64_t>();
        auto coarse = static_cast<Coarse>(r.get<std::uint8_t>());
        auto hnsw_m = r.get<std::uint64_t>();
        bool by_res = r.get<std::uint8_t>() != 0;
        bool sph = r.get<std::uint8_t>() != 0;
        auto np = r.get<std::uint64_t>();
        auto dm = static_cast<DirectMap::Mode>(r.get<std::uint8_t>());
        bool trained = r.get<std::uint8_t>() != 0;
        bool raw = r.get<std::uint8_t>() != 0;
        KMeansParams kp;
        kp.niter = r.get<std::uint64_t>();
        kp.seed = r.get<std::uint64_t>();
        kp.max_points_per_centroid = r.get<std::uint64_t>();
        auto n = r.get<std::uint64_t>();
        auto cdata = r.get_vector<float>();
        if (coarse != Coarse::Flat && coarse != Coarse::Hnsw) throw Error(ErrorKind::Format, "bad coarse kind");
        if (static_cast<std::uint8_t>(dm) > 2) throw Error(ErrorKind::Format, "bad direct map mode");
        std::unique_ptr<Index> coarse_idx;
        if (r.get<std::uint8_t>()) coarse_idx = read_child(r);
        std::unique_ptr<Codec> codec;
        if (!raw) codec = read_codec(r);
        auto idx = std::make_unique<IvfIndex>(d, nlist, std::move(codec), metric, coarse, hnsw_m);
        idx->by_residual = by_res;
        idx->spherical = sph;
        idx->nprobe = np;
        idx->kmeans = kp;
        if (!cdata.empty()) {
            if (cdata.size() != nlist * d) throw Error(ErrorKind::Format, "IVF centroid size mismatch");
            idx->centroids_ = VectorSet(nlist, d, std::move(cdata));
        }
        if (coarse_idx) {
            if (coarse_idx->d() != d || coarse_idx->ntotal() != nlist) {
                throw Error(ErrorKind::Format, "IVF coarse quantizer shape mismatch");
            }
            idx->coarse_ = std::move(coarse_idx);
        }
        auto lists = ArrayInvertedLists::read(r);
        if (lists->nlist() != nlist || lists->code_size() != idx->codec_->code_size()) {
            throw Error(ErrorKind::Format, "IVF inverted list shape mismatch");
        }
        if (lists->total_size() != n) throw Error(ErrorKind::Format, "IVF list sizes do not sum to ntotal");
        idx->lists_ = std::move(lists);
        idx->ntotal_ = n;
        idx->is_trained_ = trained;
        idx->set_direct_map(dm);
        return idx;
    }

private:
    /// Distance between a query and the codes of one list.
    struct Scanner {
        const IvfIndex& ivf;
        std::unique_ptr<CodeDistance> dis;
        size_t code_size;
        std::vector<float> qbuf, rbuf;
        float bias = 0.0f;
        bool generic = false;  // decode, add centroid, evaluate the metric
        const float* q = nullptr;
        const float* c = nullptr;

        void set_list(const float* query, size_t list) {
            q = query;
            bias = 0.0f;
            if (!ivf.residual_encoding()) {
                if (q != qcached) {
                    dis->set_query(q);
                    qcached = q;
                }
                return;
            }
            c = ivf.centroids_.ptr(list);
            const size_t d = ivf.d_;
            if (ivf.metric_.kind == MetricKind::L2) {
                for (size_t j = 0; j < d; ++j) qbuf[j] = q[j] - c[j];
                dis->set_query(qbuf.data());
            } else if (ivf.metric_.kind == MetricKind::InnerProduct) {
                if (q != qcached) {
                    dis->set_query(q);
                    qcached = q;
                }
                bias = inner_product(q, c, d);
            }
        }

        float distance(const std::uint8_t* code) {
            if (!generic) return (*dis)(code) + bias;
            ivf.codec_->decode_one(code, rbuf.data());
            for (size_t j = 0; j < ivf.d_; ++j) rbuf[j] += c[j];
            return distance_unchecked(q, rbuf.data(), ivf.d_, ivf.metric_);
        }

        const float* qcached = nullptr;
    };

    Scanner make_scanner() const {
        Scanner s{*this, codec_->distance_computer(metric_), codec_->code_size(), std::vector<float>(d_),
                  std::vector<float>(d_)};
        s.generic = residual_encoding() && metric_.kind != MetricKind::L2 && metric_.kind != MetricKind::InnerProduct;
        return s;
    }

    size_t effective_nprobe(const SearchParams& params) const {
        size_t np = params.nprobe ? params.nprobe : nprobe;
        detail::require_arg(np >= 1 && np <= nlist_, "nprobe must be in [1, " + std::to_string(nlist_) +
                                                         "], got " + std::to_string(np));
        return np;
    }

    Metric coarse_metric() const {
        return metric_.kind == MetricKind::InnerProduct ? Metric::inner_product() : Metric::l2();
    }

    void build_coarse() {
        if (coarse_kind_ == Coarse::Hnsw) {
            auto h = std::make_unique<HnswIndex>(d_, hnsw_m_, coarse_metric());
            h->add(centroids_);
            coarse_ = std::move(h);
        } else {
            auto f = std::make_unique<FlatIndex>(d_, coarse_metric());
            f->add(centroids_);
            coarse_ = std::move(f);
        }
    }

    SearchResult coarse_search(const VectorSet& x, size_t np, const SearchParams& params, size_t* ndis) const {
        detail::require(coarse_ != nullptr, ErrorKind::NotTrained, "IVF coarse quantizer is not trained");
        if (coarse_kind_ == Coarse::Hnsw) {
            const auto& h = static_cast<const HnswIndex&>(*coarse_);
            SearchParams hp;
            hp.ef_search = params.ef_search ? params.ef_search : std::max(4 * np, h.ef_search);
            HnswStats st;
            auto r = h.search_with_stats(x, np, hp, &st);
            if (ndis) *ndis = st.ndis;
            return r;
        }
        if (ndis) *ndis = x.n * nlist_;
        return static_cast<const FlatIndex&>(*coarse_).search_direct(x, np);
    }

    VectorSet residuals(const VectorSet& x, const std::vector<idx_t>& lists) const {
        VectorSet r(x.n, d_);
        parallel_for(x.n, [&](size_t i) {
            const float* c = centroids_.ptr(static_cast<size_t>(lists[i]));
            for (size_t j = 0; j < d_; ++j) r.ptr(i)[j] = x.ptr(i)[j] - c[j];
        });
        return r;
    }

    std::optional<DirectMap::Slot> locate(idx_t id) const {
        if (direct_map_.enabled()) return direct_map_.lookup(id);
        for (size_t l = 0; l < nlist_; ++l) {
            ListView v = lists_->read_list(l);
            for (size_t o = 0; o < v.size; ++o) {
                if (v.ids[o] == id) return DirectMap::Slot{static_cast<std::uint32_t>(l), static_cast<std::uint32_t>(o)};
            }
        }
        return std::nullopt;
    }

    void erase_slot(idx_t id, DirectMap::Slot slot) {
        idx_t moved = lists_->remove_at(slot.list, slot.offset);
        direct_map_.erase(id);
        if (moved != kInvalidId) direct_map_.move(moved, slot.list, slot.offset);
        --ntotal_;
    }

    size_t nlist_;
    Coarse coarse_kind_;
    size_t hnsw_m_;
    bool raw_ = false;
    std::unique_ptr<Codec> codec_;
    VectorSet centroids_;
    std::unique_ptr<Index> coarse_;
    std::unique_ptr<InvertedLists> lists_;
    DirectMap direct_map_;
};

} // namespace vx
