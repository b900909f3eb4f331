#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <queue>
#include <random>
#include <unordered_map>
#include <vector>

#include "vx/core/distance.hpp"
#include "vx/core/index.hpp"
#include "vx/core/metric_io.hpp"
#include "vx/core/parallel.hpp"
#include "vx/core/rng.hpp"
#include "vx/core/topk.hpp"

namespace vx {

struct HnswStats {
    /// Distance evaluations over all queries of the call.
    size_t ndis = 0;
    /// Largest per-query count.
    size_t max_ndis_per_query = 0;
};

/// Hierarchical navigable small-world graph. Nodes sit on levels 0..l with
/// l = floor(-ln U / ln M); level 0 keeps up to 2M links per node, upper
/// levels M. Builds are sequential and deterministic for a given seed.
class HnswIndex : public Index {
public:
    size_t ef_construction = 40;
    size_t ef_search = 16;

    explicit HnswIndex(size_t d, size_t m = 32, Metric metric = Metric::l2(), std::uint64_t seed = 12345)
        : Index(d, metric), m_(m), seed_(seed) {
        detail::require_arg(m >= 2, "HNSW requires M >= 2");
        detail::require(metric.kind == MetricKind::L2 || metric.kind == MetricKind::InnerProduct,
                        ErrorKind::Unsupported, "HNSW supports only L2 and inner product");
        ml_ = 1.0 / std::log(static_cast<double>(m));
    }

    std::string type_name() const override { return "HnswIndex"; }

    size_t m() const { return m_; }
    std::uint64_t seed() const { return seed_; }
    int max_level() const { return max_level_; }
    std::int64_t entry_point() const { return entry_; }
    size_t capacity(int level) const { return level == 0 ? 2 * m_ : m_; }
    int level_of(size_t node) const { return static_cast<int>(links_[node].size()) - 1; }
    const std::vector<std::uint32_t>& neighbors(size_t node, int level) const { return links_[node][level]; }
    idx_t label(size_t node) const { return labels_[node]; }
    const float* vector(size_t node) const { return data_.data() + node * d_; }

    void add_with_ids(const VectorSet& x, std::span<const idx_t> ids) override {
        check_addable(x, ids);
        for (size_t i = 0; i < x.n; ++i) {
            detail::require_arg(!node_of_.contains(ids[i]), "duplicate id " + std::to_string(ids[i]));
            size_t node = labels_.size();
            node_of_.emplace(ids[i], node);
            labels_.push_back(ids[i]);
            data_.insert(data_.end(), x.ptr(i), x.ptr(i) + d_);
            insert(node);
        }
        ntotal_ = labels_.size();
    }

    SearchResult search(const VectorSet& q, size_t k, const SearchParams& params = {}) const override {
        return search_with_stats(q, k, params, nullptr);
    }

    SearchResult search_with_stats(const VectorSet& q, size_t k, const SearchParams& params,
                                   HnswStats* stats) const {
        check_searchable(q, k);
        size_t ef = params.ef_search ? params.ef_search : std::max(ef_search, k);
        detail::require_arg(ef >= k, "HNSW search requires efSearch >= k");
        SearchResult out(q.n, k, metric_.worst_value());
        std::vector<size_t> counts(q.n, 0);
        parallel_for(q.n, [&](size_t qi) {
            if (labels_.empty()) return;
            size_t ndis = 0;
            auto found = search_one(q.ptr(qi), ef, params.selector, ndis);
            TopKHeap heap(k, metric_.higher_is_better());
            for (const auto& [dist, node] : found) heap.push(external(dist), labels_[node]);
            heap.write_sorted(out.ids_of(qi), out.distances_of(qi), metric_.worst_value());
            counts[qi] = ndis;
        });
        if (stats) {
            for (size_t c : counts) {
                stats->ndis += c;
                stats->max_ndis_per_query = std::max(stats->max_ndis_per_query, c);
            }
        }
        return out;
    }

    std::vector<float> reconstruct(idx_t id) const override {
        auto it = node_of_.find(id);
        detail::require(it != node_of_.end(), ErrorKind::NotFound, "id " + std::to_string(id) + " not stored");
        return {vector(it->second), vector(it->second) + d_};
    }

    size_t remove_ids(std::span<const idx_t>) override {
        throw Error(ErrorKind::Unsupported, "HNSW does not support removal");
    }

    void reset() override {
        data_.clear();
        labels_.clear();
        node_of_.clear();
        links_.clear();
        entry_ = -1;
        max_level_ = -1;
        ntotal_ = 0;
    }

    void write(ByteWriter& w) const override {
        w.section("HNSW", [&](ByteWriter& s) {
            s.put<std::uint64_t>(d_);
            detail::write_metric(s, metric_);
            s.put<std::uint64_t>(m_);
            s.put<std::uint64_t>(seed_);
            s.put<std::uint64_t>(ef_construction);
            s.put<std::uint64_t>(ef_search);
            s.put<std::int64_t>(entry_);
            s.put<std::int32_t>(max_level_);
            s.put_vector(data_);
            s.put_vector(labels_);
            for (const auto& node : links_) {
                s.put<std::uint32_t>(static_cast<std::uint32_t>(node.size()));
                for (const auto& lst : node) s.put_vector(lst);
            }
        });
    }

    static std::unique_ptr<HnswIndex> read_body(ByteReader& r) {
        auto d = r.get<std::uint64_t>();
        Metric metric = detail::read_metric(r);
        auto m = r.get<std::uint64_t>();
        auto seed = r.get<std::uint64_t>();
        auto idx = std::make_unique<HnswIndex>(d, m, metric, seed);
        idx->ef_construction = r.get<std::uint64_t>();
        idx->ef_search = r.get<std::uint64_t>();
        idx->entry_ = r.get<std::int64_t>();
        idx->max_level_ = r.get<std::int32_t>();
        idx->data_ = r.get_vector<float>();
        idx->labels_ = r.get_vector<idx_t>();
        const size_t n = idx->labels_.size();
        if (idx->data_.size() != n * d) throw Error(ErrorKind::Format, "HNSW payload size mismatch");
        idx->links_.resize(n);
        for (size_t i = 0; i < n; ++i) {
            auto levels = r.get<std::uint32_t>();
            if (levels == 0 || levels > 64) throw Error(ErrorKind::Format, "bad HNSW node level count");
            idx->links_[i].resize(levels);
            for (auto& lst : idx->links_[i]) {
                lst = r.get_vector<std::uint32_t>();
                for (auto t : lst) {
                    if (t >= n) throw Error(ErrorKind::Format, "HNSW edge target out of range");
                }
            }
            idx->node_of_.emplace(idx->labels_[i], i);
        }
        if (n && (idx->entry_ < 0 || static_cast<size_t>(idx->entry_) >= n)) {
            throw Error(ErrorKind::Format, "HNSW entry point out of range");
        }
        idx->ntotal_ = n;
        return idx;
    }

private:
    using Scored = std::pair<float, std::uint32_t>;  // (internal distance, node)

    // Internal distances are smaller-is-better; inner products are negated.
    float dist(const float* q, size_t node) const {
        return metric_.kind == MetricKind::L2 ? l2_sqr(q, vector(node), d_) : -inner_product(q, vector(node), d_);
    }
    float dist_nodes(size_t a, size_t b) const { return dist(vector(a), b); }
    float external(float internal) const { return metric_.kind == MetricKind::L2 ? internal : -internal; }

    struct Visited {
        std::vector<std::uint32_t> tag;
        std::uint32_t epoch = 0;
        void reset(size_t n) {
            if (tag.size() < n) tag.resize(n, 0);
            if (++epoch == 0) {
                std::fill(tag.begin(), tag.end(), 0);
                epoch = 1;
            }
        }
        bool test_and_set(size_t i) {
            if (tag[i] == epoch) return true;
            tag[i] = epoch;
            return false;
        }
    };

    static Visited& visited_buffer() {
        thread_local Visited v;
        return v;
    }

    int draw_level(size_t node) const {
        Rng rng(mix_seed(seed_, node));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        double u = 1.0 - unif(rng);  // (0, 1]
        return static_cast<int>(std::floor(-std::log(u) * ml_));
    }

    std::uint32_t greedy(const float* q, std::uint32_t cur, float& cur_d, int level, size_t& ndis) const {
        bool changed = true;
        while (changed) {
            changed = false;
            for (auto nb : links_[cur][level]) {
                float dn = dist(q, nb);
                ++ndis;
                if (dn < cur_d || (dn == cur_d && nb < cur)) {
                    cur_d = dn;
                    cur = nb;
                    changed = true;
                }
            }
        }
        return cur;
    }

    /// Best-first beam search on one level. Returns up to ef results sorted
    /// ascending. With a selector, only passing nodes enter the result set
    /// while traversal still goes through every node.
    std::vector<Scored> search_layer(const float* q, const std::vector<Scored>& entry_points, size_t ef, int level,
                                     const IdSelector* sel, size_t& ndis) const {
        Visited& vis = visited_buffer();
        vis.reset(labels_.size());
        auto worse = [](const Scored& a, const Scored& b) { return a < b; };     // max-heap on distance
        auto better = [](const Scored& a, const Scored& b) { return a > b; };    // min-heap on distance
        std::priority_queue<Scored, std::vector<Scored>, decltype(better)> cand(better);
        std::priority_queue<Scored, std::vector<Scored>, decltype(worse)> res(worse);
        auto passes = [&](std::uint32_t node) { return !sel || sel->is_member(labels_[node]); };
        for (const auto& e : entry_points) {
            if (vis.test_and_set(e.second)) continue;
            cand.push(e);
            if (passes(e.second)) res.push(e);
        }
        while (res.size() > ef) res.pop();
        while (!cand.empty()) {
            Scored c = cand.top();
            if (res.size() >= ef && c.first > res.top().first) break;
            cand.pop();
            for (auto nb : links_[c.second][level]) {
                if (vis.test_and_set(nb)) continue;
                float dn = dist(q, nb);
                ++ndis;
                if (res.size() < ef || dn < res.top().first) {
                    cand.push({dn, nb});
                    if (passes(nb)) {
                        res.push({dn, nb});
                        if (res.size() > ef) res.pop();
                    }
                }
            }
        }
        std::vector<Scored> out;
        out.reserve(res.size());
        while (!res.empty()) {
            out.push_back(res.top());
            res.pop();
        }
        std::reverse(out.begin(), out.end());
        return out;
    }

    std::vector<Scored> search_one(const float* q, size_t ef, const IdSelector* sel, size_t& ndis) const {
        auto cur = static_cast<std::uint32_t>(entry_);
        float cur_d = dist(q, cur);
        ++ndis;
        for (int lev = max_level_; lev > 0; --lev) cur = greedy(q, cur, cur_d, lev, ndis);
        return search_layer(q, {{cur_d, cur}}, ef, 0, sel, ndis);
    }

    /// Keeps a candidate only if it is closer to the base than to every
    /// neighbor kept so far. `cands` must be sorted ascending.
    std::vector<std::uint32_t> select_neighbors(const std::vector<Scored>& cands, size_t cap) const {
        std::vector<std::uint32_t> kept;
        for (const auto& [dc, c] : cands) {
            if (kept.size() >= cap) break;
            bool good = true;
            for (auto r : kept) {
                if (dist_nodes(c, r) < dc) {
                    good = false;
                    break;
                }
            }
            if (good) kept.push_back(c);
        }
        return kept;
    }

    void insert(size_t node) {
        int level = draw_level(node);
        links_.emplace_back(static_cast<size_t>(level) + 1);
        if (entry_ < 0) {
            entry_ = static_cast<std::int64_t>(node);
            max_level_ = level;
            return;
        }
        const float* q = vector(node);
        size_t ndis = 0;
        auto cur = static_cast<std::uint32_t>(entry_);
        float cur_d = dist(q, cur);
        for (int lev = max_level_; lev > level; --lev) cur = greedy(q, cur, cur_d, lev, ndis);
        std::vector<Scored> eps{{cur_d, cur}};
        for (int lev = std::min(level, max_level_); lev >= 0; --lev) {
            auto found = search_layer(q, eps, ef_construction, lev, nullptr, ndis);
            auto chosen = select_neighbors(found, capacity(lev));
            links_[node][lev] = chosen;
            for (auto nb : chosen) link(nb, static_cast<std::uint32_t>(node), lev);
            eps = std::move(found);
        }
        if (level > max_level_) {
            max_level_ = level;
            entry_ = static_cast<std::int64_t>(node);
        }
    }

    void link(std::uint32_t from, std::uint32_t to, int level) {
        auto& lst = links_[from][level];
        if (std::find(lst.begin(), lst.end(), to) != lst.end()) return;
        if (lst.size() < capacity(level)) {
            lst.push_back(to);
            return;
        }
        std::vector<Scored> cands;
        cands.reserve(lst.size() + 1);
        for (auto nb : lst) cands.push_back({dist_nodes(from, nb), nb});
        cands.push_back({dist_nodes(from, to), to});
        std::sort(cands.begin(), cands.end());
        lst = select_neighbors(cands, capacity(level));
    }

    size_t m_;
    std::uint64_t seed_;
    double ml_;
    std::vector<float> data_;
    std::vector<idx_t> labels_;
    std::unordered_map<idx_t, size_t> node_of_;
    std::vector<std::vector<std::vector<std::uint32_t>>> links_;
    std::int64_t entry_ = -1;
    int max_level_ = -1;
};

} // namespace vx
