#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "vx/bench/synth.hpp"
#include "vx/core/accuracy.hpp"
#include "vx/core/refine.hpp"
#include "vx/factory/index_io.hpp"
#include "vx/flat/flat_index.hpp"
#include "vx/graph/hnsw.hpp"
#include "vx/ivf/ivf_index.hpp"
#include "vx/quantize/codec_index.hpp"
#include "vx/transform/pretransform_index.hpp"
#include "vx/tune/explorer.hpp"

namespace vx {

/// Search that also reports the number of distance evaluations where the
/// index type exposes it (flat scans count every stored vector).
inline SearchResult search_counting(const Index& index, const VectorSet& q, size_t k, const SearchParams& params,
                                    size_t* ndis) {
    size_t count = 0;
    SearchResult r;
    if (auto* ivf = dynamic_cast<const IvfIndex*>(&index)) {
        IvfStats st;
        r = ivf->search_with_stats(q, k, params, &st);
        count = st.ndis;
    } else if (auto* h = dynamic_cast<const HnswIndex*>(&index)) {
        HnswStats st;
        r = h->search_with_stats(q, k, params, &st);
        count = st.ndis;
    } else if (auto* pt = dynamic_cast<const PreTransformIndex*>(&index)) {
        // Forward through the transform chain so the sub-index counts.
        VectorSet y = q;
        for (const auto& t : pt->chain()) y = t.apply(y);
        r = search_counting(pt->sub(), y, k, params, &count);
    } else if (auto* rf = dynamic_cast<const RefineIndex*>(&index)) {
        r = index.search(q, k, params);
        size_t shortlist = params.shortlist ? params.shortlist : rf->k_factor * k;
        size_t base_count = 0;
        search_counting(rf->base(), q, std::max(shortlist, k), params, &base_count);
        count = base_count + q.n * std::min(shortlist, rf->ntotal());
    } else {
        r = index.search(q, k, params);
        if (dynamic_cast<const FlatIndex*>(&index) || dynamic_cast<const CodecFlatIndex*>(&index)) {
            count = q.n * index.ntotal();
        }
    }
    if (ndis) *ndis = count;
    return r;
}

/// One search-time configuration with a printable label.
struct EvalSetting {
    std::map<std::string, double> values;
    SearchParams params;
};

/// Maps axis names (nprobe, efSearch, shortlist) onto search parameters.
inline SearchParams params_from_axes(const std::map<std::string, double>& v) {
    SearchParams p;
    for (const auto& [name, val] : v) {
        auto n = static_cast<size_t>(std::llround(val));
        if (name == "nprobe") p.nprobe = n;
        else if (name == "efSearch" || name == "ef_search" || name == "ef") p.ef_search = n;
        else if (name == "shortlist") p.shortlist = n;
        else throw Error(ErrorKind::InvalidArgument, "unknown search axis '" + name + "'");
    }
    return p;
}

struct EvalRow {
    std::map<std::string, double> setting;
    double r1_at_1 = 0, r1_at_10 = 0, r1_at_100 = 0, r10_at_10 = 0, r100_at_100 = 0;
    double qps = 0;
    double ndis_per_query = 0;
    double p50_ms = 0, p95_ms = 0, p99_ms = 0;
    size_t memory_bytes = 0;
    size_t code_size = 0;
};

struct EvalOptions {
    size_t repeats = 5;
    bool warmup = true;
    /// Queries timed one at a time for latency percentiles.
    size_t latency_queries = 200;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline double percentile(std::vector<double> v, double p) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    double pos = p * static_cast<double>(v.size() - 1);
    size_t lo = static_cast<size_t>(std::floor(pos)), hi = static_cast<size_t>(std::ceil(pos));
    return v[lo] + (v[hi] - v[lo]) * (pos - static_cast<double>(lo));
}

inline double median(std::vector<double> v) { return percentile(std::move(v), 0.5); }

/// Bytes per stored vector, counting only the codes.
inline size_t code_size_of(const Index& index) {
    if (auto* ivf = dynamic_cast<const IvfIndex*>(&index)) return ivf->codec().code_size();
    if (auto* c = dynamic_cast<const CodecFlatIndex*>(&index)) return c->codec().code_size();
    if (auto* pt = dynamic_cast<const PreTransformIndex*>(&index)) return code_size_of(pt->sub());
    if (auto* rf = dynamic_cast<const RefineIndex*>(&index)) return code_size_of(rf->base()) + code_size_of(rf->exact());
    return index.d() * sizeof(float);
}

} // namespace detail

/// Recall against the dataset's ground truth for the standard (n, k) pairs
/// whose k fits within both the result and the ground truth.
inline void fill_recalls(EvalRow& row, const SearchResult& r, const SearchResult& gt) {
    auto rec = [&](size_t n, size_t k) {
        return (k <= r.k && n <= gt.k) ? knn_recall(r, gt, n, k) : std::nan("");
    };
    row.r1_at_1 = rec(1, 1);
    row.r1_at_10 = rec(1, 10);
    row.r1_at_100 = rec(1, 100);
    row.r10_at_10 = rec(10, 10);
    row.r100_at_100 = rec(100, 100);
}

/// Evaluates each setting: recalls, batch QPS (median of `repeats` after a
/// warm-up pass), distance counts and single-query latency percentiles.
inline std::vector<EvalRow> run_eval(const Index& index, const Dataset& ds, const std::vector<EvalSetting>& settings,
                                     const EvalOptions& opt = {}) {
    detail::require_dim(ds.queries.d, index.d(), "run_eval");
    detail::require_arg(ds.ground_truth.nq == ds.queries.n, "run_eval needs ground truth for every query");
    const size_t k_max = std::min<size_t>(100, std::max<size_t>(index.ntotal(), 1));
    const size_t mem = write_index(index).size();
    std::vector<EvalRow> rows;
    for (const auto& s : settings) {
        EvalRow row;
        row.setting = s.values;
        row.memory_bytes = mem;
        row.code_size = detail::code_size_of(index);
        // A pinned efSearch bounds the retrievable k; larger recalls are NaN.
        const size_t k = s.params.ef_search > 0 ? std::min(k_max, s.params.ef_search) : k_max;
        size_t ndis = 0;
        SearchResult r = search_counting(index, ds.queries, k, s.params, &ndis);
        fill_recalls(row, r, ds.ground_truth);
        row.ndis_per_query = ds.queries.n ? static_cast<double>(ndis) / static_cast<double>(ds.queries.n) : 0.0;
        if (opt.warmup) index.search(ds.queries, k, s.params);
        std::vector<double> times;
        for (size_t rep = 0; rep < std::max<size_t>(opt.repeats, 1); ++rep) {
            auto t0 = std::chrono::steady_clock::now();
            index.search(ds.queries, k, s.params);
            times.push_back(detail::seconds_since(t0));
        }
        double t = detail::median(times);
        row.qps = t > 0 ? static_cast<double>(ds.queries.n) / t : 0.0;
        std::vector<double> lat;
        for (size_t i = 0; i < std::min(opt.latency_queries, ds.queries.n); ++i) {
            VectorSet one = ds.queries.slice(i, i + 1);
            auto t0 = std::chrono::steady_clock::now();
            index.search(one, k, s.params);
            lat.push_back(detail::seconds_since(t0) * 1e3);
        }
        row.p50_ms = detail::percentile(lat, 0.50);
        row.p95_ms = detail::percentile(lat, 0.95);
        row.p99_ms = detail::percentile(lat, 0.99);
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Recall measure used as accuracy by a sweep.
inline double row_accuracy(const EvalRow& r, const std::string& measure) {
    if (measure == "1-R@1") return r.r1_at_1;
    if (measure == "1-R@10") return r.r1_at_10;
    if (measure == "1-R@100") return r.r1_at_100;
    if (measure == "10-R@10") return r.r10_at_10;
    if (measure == "100-R@100") return r.r100_at_100;
    throw Error(ErrorKind::InvalidArgument, "unknown accuracy measure '" + measure + "'");
}

struct SweepResult {
    ExploreResult explore;
    std::vector<EvalRow> rows;  // one per evaluated setting, in evaluation order
};

/// Pareto sweep over search-time axes; speed is QPS.
inline SweepResult sweep(const Index& index, const Dataset& ds, const ParameterSpace& space,
                         const std::string& measure = "1-R@1", std::uint64_t seed = 0, const EvalOptions& opt = {}) {
    SweepResult out;
    out.explore = explore(
        space,
        [&](const ParameterSpace::Setting& s) {
            auto vals = space.values(s);
            EvalSetting es;
            for (size_t i = 0; i < vals.size(); ++i) es.values[space.axes()[i].name] = vals[i];
            es.params = params_from_axes(es.values);
            auto rows = run_eval(index, ds, {es}, opt);
            out.rows.push_back(rows[0]);
            return Measurement{rows[0].qps, row_accuracy(rows[0], measure)};
        },
        seed);
    return out;
}

/// Least squares on log t = log t0 + alpha log N.
struct ScalingFit {
    double t0 = 0.0;
    double alpha = 0.0;
};

inline ScalingFit fit_scaling_law(const std::vector<std::pair<double, double>>& points) {
    detail::require_arg(points.size() >= 3, "scaling fit needs at least 3 points");
    double sx = 0, sy = 0;
    for (const auto& [n, t] : points) {
        detail::require_arg(n > 0 && t > 0, "scaling fit needs positive sizes and times");
        sx += std::log(n);
        sy += std::log(t);
    }
    const double m = static_cast<double>(points.size());
    double mx = sx / m, my = sy / m, sxx = 0, sxy = 0;
    for (const auto& [n, t] : points) {
        double dx = std::log(n) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(t) - my);
    }
    detail::require_arg(sxx > 0, "scaling fit needs at least two distinct sizes");
    double alpha = sxy / sxx;
    return {std::exp(my - alpha * mx), alpha};
}

struct CostModelRow {
    size_t k_ivf = 0;
    size_t p_ivf = 0;
    double measured_ndis = 0;  // per query
    double model_ndis = 0;
    double imbalance = 0;
};

struct CostModelReport {
    size_t n = 0;
    std::vector<CostModelRow> rows;
    /// Per probe count: grid argmin of the measured and modelled costs.
    std::map<size_t, size_t> measured_argmin, model_argmin;
    std::map<size_t, double> optimum;  // sqrt(P * N)
};

/// Trains IVF-Flat at every K of the grid over `base` and measures the mean
/// distance count per query at every P.
inline CostModelReport validate_cost_model(const VectorSet& base, const VectorSet& queries,
                                           const std::vector<size_t>& k_grid, const std::vector<size_t>& p_grid,
                                           std::uint64_t seed = 1234, size_t niter = 10) {
    CostModelReport rep;
    rep.n = base.n;
    std::map<size_t, std::vector<std::pair<size_t, double>>> by_p;
    for (size_t k : k_grid) {
        IvfIndex ivf(base.d, k);
        ivf.kmeans.seed = seed;
        ivf.kmeans.niter = niter;
        ivf.train(base);
        ivf.add(base);
        double imb = ivf.imbalance();
        for (size_t p : p_grid) {
            if (p > k) continue;
            SearchParams sp;
            sp.nprobe = p;
            IvfStats st;
            ivf.search_with_stats(queries, 1, sp, &st);
            CostModelRow row;
            row.k_ivf = k;
            row.p_ivf = p;
            row.measured_ndis = static_cast<double>(st.ndis) / static_cast<double>(queries.n);
            row.model_ndis = ivf_cost_model(static_cast<double>(k), static_cast<double>(p), static_cast<double>(base.n));
            row.imbalance = imb;
            rep.rows.push_back(row);
            by_p[p].push_back({k, row.measured_ndis});
        }
    }
    for (auto& [p, pts] : by_p) {
        auto best = std::min_element(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.second < b.second; });
        rep.measured_argmin[p] = best->first;
        std::vector<size_t> ks;
        for (auto& pt : pts) ks.push_back(pt.first);
        rep.model_argmin[p] = ivf_cost_argmin(ks, static_cast<double>(p), static_cast<double>(base.n));
        rep.optimum[p] = std::sqrt(static_cast<double>(p) * static_cast<double>(base.n));
    }
    return rep;
}

/// Position of `value` in a sorted grid.
inline size_t grid_position(const std::vector<size_t>& grid, size_t value) {
    auto it = std::find(grid.begin(), grid.end(), value);
    detail::require_arg(it != grid.end(), "value not on the grid");
    return static_cast<size_t>(it - grid.begin());
}

/// Grid entry closest to `x` on a log scale.
inline size_t grid_closest_log(const std::vector<size_t>& grid, double x) {
    size_t best = grid.at(0);
    double bd = std::abs(std::log(static_cast<double>(best) / x));
    for (size_t g : grid) {
        double dd = std::abs(std::log(static_cast<double>(g) / x));
        if (dd < bd) {
            bd = dd;
            best = g;
        }
    }
    return best;
}

struct ScalingPoint {
    size_t n = 0;
    size_t nlist = 0;
    size_t nprobe = 0;
    double recall = 0;
    double seconds = 0;
};

/// IVF-Flat search time per size, with nlist = round(nlist_factor*sqrt(N))
/// and the smallest power-of-two nprobe reaching target 1-recall@1.
inline std::vector<ScalingPoint> measure_ivf_scaling(SynthKind kind, const std::vector<size_t>& sizes, size_t d,
                                                     size_t nq, double target, std::uint64_t seed,
                                                     double nlist_factor = 1.0, size_t repeats = 5) {
    std::vector<ScalingPoint> out;
    for (size_t n : sizes) {
        SynthParams sp;
        sp.nq = nq;
        Dataset ds = synth_dataset(kind, n, d, seed, sp);
        attach_ground_truth(ds, 1);
        ScalingPoint pt;
        pt.n = n;
        pt.nlist = std::max<size_t>(1, static_cast<size_t>(std::llround(nlist_factor * std::sqrt(static_cast<double>(n)))));
        IvfIndex ivf(d, pt.nlist, nullptr, ds.metric);
        ivf.kmeans.seed = seed;
        ivf.kmeans.niter = 10;
        ivf.train(ds.base);
        ivf.add(ds.base);
        for (size_t np = 1;; np *= 2) {
            np = std::min(np, pt.nlist);
            SearchParams p;
            p.nprobe = np;
            auto r = ivf.search(ds.queries, 1, p);
            double rec = knn_recall(r, ds.ground_truth, 1, 1);
            if (rec >= target || np == pt.nlist) {
                pt.nprobe = np;
                pt.recall = rec;
                break;
            }
        }
        SearchParams p;
        p.nprobe = pt.nprobe;
        ivf.search(ds.queries, 1, p);
        std::vector<double> times;
        for (size_t rep = 0; rep < repeats; ++rep) {
            auto t0 = std::chrono::steady_clock::now();
            ivf.search(ds.queries, 1, p);
            times.push_back(detail::seconds_since(t0));
        }
        pt.seconds = detail::median(times);
        out.push_back(pt);
    }
    return out;
}

} // namespace vx
