#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <queue>
#include <set>

#include "test_util.hpp"
#include "vx/bench/synth.hpp"
#include "vx/binary/binary.hpp"
#include "vx/core/accuracy.hpp"
#include "vx/factory/index_io.hpp"
#include "vx/flat/flat_index.hpp"
#include "vx/graph/hnsw.hpp"
#include "vx/ivf/ivf_index.hpp"
#include "vx/quantize/product.hpp"
#include "vx/transform/linear_transform.hpp"

using namespace vx;
using vxt::gaussian;

namespace {

std::unique_ptr<IvfIndex> ivf_flat(const VectorSet& x, size_t nlist, Metric m = Metric::l2(), std::uint64_t seed = 1) {
    auto ivf = std::make_unique<IvfIndex>(x.d, nlist, nullptr, m);
    ivf->kmeans.seed = seed;
    ivf->train(x);
    ivf->add(x);
    return ivf;
}

SearchParams probes(size_t np) {
    SearchParams p;
    p.nprobe = np;
    return p;
}

} // namespace

TEST(Ivf, CostModelAndImbalance) {
    EXPECT_DOUBLE_EQ(ivf_cost_model(4000, 16, 1e6), 8000.0);
    std::vector<size_t> grid{1000, 2000, 4000, 8000, 16000};
    EXPECT_EQ(ivf_cost_argmin(grid, 16, 1e6), 4000u);
    EXPECT_DOUBLE_EQ(ivf_cost_model(300, 300, 5e4), 300 + 5e4);
    std::vector<size_t> small{250, 500, 1000, 1250, 2000, 4000};
    EXPECT_EQ(ivf_cost_argmin(small, 16, 1e5), 1250u);
    std::vector<size_t> even{10, 10, 10, 10}, skew{20, 0};
    EXPECT_DOUBLE_EQ(imbalance_factor(even), 1.0);
    EXPECT_DOUBLE_EQ(imbalance_factor(skew), 2.0);
}

TEST(Ivf, SingleListIsFlatScan) {
    auto x = gaussian(500, 8, 1), q = gaussian(20, 8, 2);
    auto ivf = ivf_flat(x, 1);
    FlatIndex flat(8);
    flat.add(x);
    EXPECT_EQ(ivf->search(q, 10), flat.search_direct(q, 10));
}

TEST(Ivf, RawResidualReconstructsExactly) {
    auto x = gaussian(300, 8, 3);
    auto ivf = ivf_flat(x, 8);
    EXPECT_FALSE(ivf->residual_encoding());
    for (idx_t i = 0; i < 300; i += 7) {
        auto v = ivf->reconstruct(i);
        EXPECT_EQ(v, std::vector<float>(x.row(i).begin(), x.row(i).end()));
    }
}

TEST(Ivf, BlobCentroidsRecoverMeans) {
    SynthParams p;
    p.nblobs = 4;
    p.nq = 1;
    p.blob_separation = 20.0f;
    auto ds = synth_dataset(SynthKind::Blobs, 8000, 4, 5, p);
    std::vector<std::vector<double>> mean(4, std::vector<double>(4, 0.0));
    std::vector<double> cnt(4, 0.0);
    for (size_t i = 0; i < ds.base.n; ++i) {
        cnt[ds.labels[i]] += 1;
        for (size_t j = 0; j < 4; ++j) mean[ds.labels[i]][j] += ds.base.ptr(i)[j];
    }
    IvfIndex ivf(4, 4);
    ivf.kmeans.max_points_per_centroid = 0;
    ivf.train(ds.base);
    for (size_t b = 0; b < 4; ++b) {
        double best = 1e30;
        for (size_t c = 0; c < 4; ++c) {
            double s = 0;
            for (size_t j = 0; j < 4; ++j) {
                double t = ivf.centroids().ptr(c)[j] - mean[b][j] / cnt[b];
                s += t * t;
            }
            best = std::min(best, std::sqrt(s));
        }
        EXPECT_LT(best, 0.1) << "blob " << b;
    }
}

TEST(Ivf, AddBookkeepingAndDirectMap) {
    auto x = gaussian(1000, 8, 6);
    IvfIndex ivf(8, 16);
    ivf.set_direct_map(DirectMap::Mode::Hashtable);
    ivf.train(x);
    ivf.add(x.slice(0, 600));
    EXPECT_EQ(ivf.lists().total_size(), 600u);
    std::vector<idx_t> ids(400);
    std::iota(ids.begin(), ids.end(), 5000);
    ivf.add_with_ids(x.slice(600, 1000), ids);
    EXPECT_EQ(ivf.lists().total_size(), 1000u);
    EXPECT_EQ(ivf.ntotal(), 1000u);
    for (idx_t id : {idx_t(0), idx_t(599), idx_t(5000), idx_t(5399)}) {
        auto slot = ivf.direct_map().lookup(id);
        ASSERT_TRUE(slot.has_value());
        auto view = ivf.lists().read_list(slot->list);
        EXPECT_EQ(view.ids[slot->offset], id);
    }
    auto r = ivf.reconstruct(5001);
    EXPECT_EQ(r, std::vector<float>(x.row(601).begin(), x.row(601).end()));
}

TEST(Ivf, ExhaustiveProbeEqualsFlat) {
    for (auto m : {Metric::l2(), Metric::inner_product(), Metric(MetricKind::L1)}) {
        auto x = gaussian(3000, 12, 7), q = gaussian(50, 12, 8);
        auto ivf = ivf_flat(x, 32, m);
        FlatIndex flat(12, m);
        flat.add(x);
        EXPECT_EQ(ivf->search(q, 10, probes(32)).ids, flat.search_direct(q, 10).ids) << metric_name(m.kind);
    }
}

TEST(Ivf, CompressedResidualScanMatchesDecode) {
    auto x = gaussian(3000, 16, 9), q = gaussian(20, 16, 10);
    IvfIndex ivf(16, 16, std::make_unique<ProductCodec>(16, 4, 6));
    ivf.set_direct_map(DirectMap::Mode::Array);
    ivf.train(x);
    ivf.add(x);
    auto r = ivf.search(q, 5, probes(16));
    for (size_t qi = 0; qi < q.n; ++qi) {
        for (size_t j = 0; j < 5; ++j) {
            auto v = ivf.reconstruct(r.ids_of(qi)[j]);
            EXPECT_NEAR(r.distances_of(qi)[j], l2_sqr(q.ptr(qi), v.data(), 16), 1e-3);
        }
    }
}

TEST(Ivf, StoredVectorFoundFirst) {
    auto x = gaussian(2000, 8, 11);
    auto ivf = ivf_flat(x, 16);
    auto r = ivf->search(x.slice(123, 124), 3, probes(1));
    EXPECT_EQ(r.ids[0], 123);
    EXPECT_EQ(r.distances[0], 0.0f);
}

TEST(Ivf, DistanceCountsAddUp) {
    auto x = gaussian(4000, 8, 12), q = gaussian(30, 8, 13);
    auto ivf = ivf_flat(x, 20);
    IvfStats st;
    ivf->search_with_stats(q, 5, probes(20), &st);
    EXPECT_EQ(st.codes_scanned, 30u * 4000u);
    EXPECT_EQ(st.coarse_ndis, 30u * 20u);
    EXPECT_EQ(st.ndis, st.coarse_ndis + st.codes_scanned);

    // Oracle: the lists of each query's nearest centroid.
    FlatIndex cents(8);
    cents.add(ivf->centroids());
    auto nearest = cents.search_direct(q, 1);
    auto sizes = ivf->lists().sizes();
    size_t want = 0;
    for (size_t i = 0; i < q.n; ++i) want += sizes[nearest.ids[i]];
    IvfStats one;
    ivf->search_with_stats(q, 5, probes(1), &one);
    EXPECT_EQ(one.codes_scanned, want);
    EXPECT_EQ(one.nlist_visited, q.n);
    EXPECT_NEAR(one.imbalance_factor, imbalance_factor(sizes), 1e-12);
}

TEST(Ivf, RangeSearchExhaustiveEqualsFlat) {
    auto x = gaussian(1500, 6, 14), q = gaussian(10, 6, 15);
    auto ivf = ivf_flat(x, 12);
    FlatIndex flat(6);
    flat.add(x);
    auto a = ivf->range_search(q, 2.0f, probes(12));
    auto b = flat.range_search(q, 2.0f);
    for (size_t i = 0; i < q.n; ++i) {
        std::set<idx_t> sa(a.ids_of(i).begin(), a.ids_of(i).end()), sb(b.ids_of(i).begin(), b.ids_of(i).end());
        EXPECT_EQ(sa, sb);
    }
}

TEST(Ivf, RemoveAndUpdate) {
    auto x = gaussian(2000, 8, 16), q = gaussian(10, 8, 17);
    IvfIndex ivf(8, 16);
    ivf.set_direct_map(DirectMap::Mode::Hashtable);
    ivf.train(x);
    ivf.add(x);
    auto before = ivf.search(q, 1, probes(16));
    std::vector<idx_t> rm(before.ids.begin(), before.ids.end());
    std::sort(rm.begin(), rm.end());
    rm.erase(std::unique(rm.begin(), rm.end()), rm.end());
    EXPECT_EQ(ivf.remove_ids(rm), rm.size());
    auto after = ivf.search(q, 20, probes(16));
    for (idx_t id : after.ids) EXPECT_FALSE(std::binary_search(rm.begin(), rm.end(), id));

    // Move id 77 onto query 0.
    std::vector<idx_t> upd{77};
    ivf.update_vectors(upd, q.slice(0, 1));
    auto top = ivf.search(q.slice(0, 1), 1, probes(16));
    EXPECT_EQ(top.ids[0], 77);
    EXPECT_EQ(top.distances[0], 0.0f);
}

TEST(Ivf, RemoveHalfKeepsCountsConsistent) {
    auto x = gaussian(3000, 8, 18);
    IvfIndex ivf(8, 32);
    ivf.set_direct_map(DirectMap::Mode::Array);
    ivf.train(x);
    ivf.add(x);
    std::vector<idx_t> ids(3000);
    std::iota(ids.begin(), ids.end(), 0);
    vx::Rng rng(3);
    std::shuffle(ids.begin(), ids.end(), rng);
    ids.resize(1500);
    size_t removed = ivf.remove_ids(ids);
    EXPECT_EQ(removed, 1500u);
    EXPECT_EQ(ivf.lists().total_size(), 1500u);
    EXPECT_EQ(ivf.direct_map().size(), 1500u);
    EXPECT_EQ(ivf.ntotal(), 1500u);
    // Every surviving id still resolves to its own slot.
    for (size_t l = 0; l < 32; ++l) {
        for (auto it = ivf.lists().iterate(l); it.valid(); it.next()) {
            auto slot = ivf.direct_map().lookup(it.id());
            ASSERT_TRUE(slot.has_value());
            EXPECT_EQ(slot->list, l);
            EXPECT_EQ(ivf.lists().read_list(l).ids[slot->offset], it.id());
        }
    }
}

TEST(Ivf, BigBatchMatchesSearch) {
    auto x = gaussian(5000, 8, 19), q = gaussian(200, 8, 20);
    auto ivf = ivf_flat(x, 32);
    auto sizes = ivf->lists().sizes();
    size_t total = 0;
    for (size_t l = 0; l < 32; ++l) total += ivf->lists().list_bytes(l);
    auto ref = ivf->search(q, 10, probes(4));
    auto whole = ivf->big_batch_search(q, 10, total, probes(4));
    EXPECT_EQ(whole.chunks, 1u);
    EXPECT_EQ(whole.result, ref);
    auto two = ivf->big_batch_search(q, 10, total / 2 + total / 8, probes(4));
    EXPECT_EQ(two.chunks, 2u);
    EXPECT_EQ(two.result, ref);
    EXPECT_THROW(ivf->big_batch_search(q, 10, 16, probes(4)), Error);
}

TEST(Ivf, BigBatchLargeRespectsBudget) {
    auto x = gaussian(100000, 8, 21), q = gaussian(10000, 8, 22);
    auto ivf = ivf_flat(x, 256);
    size_t total = 0, largest = 0;
    for (size_t l = 0; l < 256; ++l) {
        total += ivf->lists().list_bytes(l);
        largest = std::max(largest, ivf->lists().list_bytes(l));
    }
    size_t budget = std::max(largest, total / 8 + 1);
    auto bb = ivf->big_batch_search(q, 10, budget, probes(4));
    EXPECT_GE(bb.chunks, 8u);
    EXPECT_LE(bb.peak_resident_bytes, budget);
    EXPECT_EQ(bb.result, ivf->search(q, 10, probes(4)));
}

TEST(Ivf, ResidualEncodingHelpsShortCodes) {
    double with = 0, without = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        SynthParams p;
        p.nq = 200;
        p.nblobs = 32;
        p.blob_separation = 3.0f;
        auto ds = synth_dataset(SynthKind::Blobs, 10000, 64, seed, p);
        attach_ground_truth(ds, 1);
        for (bool res : {true, false}) {
            IvfIndex ivf(64, 64, std::make_unique<ProductCodec>(64, 8, 8));
            ivf.by_residual = res;
            ivf.kmeans.seed = seed;
            ivf.train(ds.base);
            ivf.add(ds.base);
            double r = knn_recall(ivf.search(ds.queries, 1, probes(8)), ds.ground_truth, 1, 1);
            (res ? with : without) += r / 5;
        }
    }
    EXPECT_GE(with, without);
}

TEST(Ivf, HnswCoarseQuantizer) {
    auto x = gaussian(5000, 16, 23), q = gaussian(100, 16, 24);
    IvfIndex ivf(16, 64, nullptr, Metric::l2(), IvfIndex::Coarse::Hnsw, 16);
    ivf.train(x);
    ivf.add(x);
    auto gt = vxt::naive_knn(x, q, 1, Metric::l2());
    EXPECT_GE(knn_recall(ivf.search(q, 1, probes(64)), gt, 1, 1), 0.95);
    EXPECT_GT(knn_recall(ivf.search(q, 1, probes(8)), gt, 1, 1), 0.5);
}

TEST(Ivf, ContractErrors) {
    IvfIndex ivf(8, 4);
    EXPECT_THROW(ivf.search(gaussian(1, 8, 1), 1), Error);
    EXPECT_THROW(ivf.add(gaussian(10, 8, 1)), Error);
    EXPECT_THROW(IvfIndex(8, 0), Error);
}

TEST(Hnsw, TinyGraphs) {
    HnswIndex one(4, 4);
    one.add(gaussian(1, 4, 1));
    EXPECT_EQ(one.entry_point(), 0);
    EXPECT_GE(one.level_of(0), 0);
    for (int l = 0; l <= one.level_of(0); ++l) EXPECT_TRUE(one.neighbors(0, l).empty());
    EXPECT_EQ(one.search(gaussian(1, 4, 2), 1).ids[0], 0);

    HnswIndex two(4, 4);
    two.add(gaussian(2, 4, 3));
    int shared = std::min(two.level_of(0), two.level_of(1));
    for (int l = 0; l <= shared; ++l) {
        EXPECT_EQ(two.neighbors(0, l), std::vector<std::uint32_t>{1});
        EXPECT_EQ(two.neighbors(1, l), std::vector<std::uint32_t>{0});
    }
}

TEST(Hnsw, FullEfOnTinyGraphIsExact) {
    auto x = gaussian(8, 6, 4), q = gaussian(20, 6, 5);
    HnswIndex h(6, 8);
    h.add(x);
    SearchParams p;
    p.ef_search = 8;
    EXPECT_EQ(h.search(q, 8, p).ids, vxt::naive_knn(x, q, 8, Metric::l2()).ids);
}

TEST(Hnsw, StructuralInvariants) {
    auto x = gaussian(3000, 16, 6);
    HnswIndex h(16, 8, Metric::l2(), 77);
    h.add(x);
    int top = -1;
    for (size_t i = 0; i < h.ntotal(); ++i) top = std::max(top, h.level_of(i));
    EXPECT_EQ(h.level_of(size_t(h.entry_point())), top);
    EXPECT_EQ(h.max_level(), top);
    for (size_t i = 0; i < h.ntotal(); ++i) {
        for (int l = 0; l <= h.level_of(i); ++l) {
            EXPECT_LE(h.neighbors(i, l).size(), h.capacity(l));
            for (auto t : h.neighbors(i, l)) {
                ASSERT_LT(t, h.ntotal());
                EXPECT_GE(h.level_of(t), l);
                EXPECT_NE(t, i);
            }
        }
    }
    EXPECT_EQ(h.capacity(0), 16u);
    EXPECT_EQ(h.capacity(1), 8u);
}

TEST(Hnsw, DeterministicBuild) {
    auto x = gaussian(2000, 8, 7);
    HnswIndex a(8, 12, Metric::l2(), 5), b(8, 12, Metric::l2(), 5);
    set_num_threads(1);
    a.add(x);
    b.add(x);
    EXPECT_EQ(write_index(a), write_index(b));
}

TEST(Hnsw, RecallAndEfMonotonicity) {
    const std::vector<size_t> efs{8, 16, 32, 64, 128};
    std::vector<double> mean(efs.size(), 0.0);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto x = gaussian(3000, 16, 100 + seed), q = gaussian(200, 16, 200 + seed);
        auto gt = vxt::naive_knn(x, q, 1, Metric::l2());
        HnswIndex h(16, 8, Metric::l2(), seed);
        h.add(x);
        for (size_t e = 0; e < efs.size(); ++e) {
            SearchParams p;
            p.ef_search = efs[e];
            mean[e] += knn_recall(h.search(q, 1, p), gt, 1, 1) / 5;
        }
    }
    int inversions = 0;
    for (size_t e = 1; e < efs.size(); ++e) inversions += mean[e] < mean[e - 1];
    EXPECT_LE(inversions, 1);
    EXPECT_GE(mean.back(), 0.95);
}

TEST(Hnsw, VisitedSetBound) {
    auto x = gaussian(5000, 16, 8), q = gaussian(100, 16, 9);
    HnswIndex h(16, 8);
    h.add(x);
    for (size_t ef : {16, 64}) {
        SearchParams p;
        p.ef_search = ef;
        HnswStats st;
        h.search_with_stats(q, 1, p, &st);
        // Greedy descent evaluates at most the neighborhood of each node it
        // steps through; a generous per-level allowance covers it.
        size_t descent = size_t(h.max_level()) * (1 + h.m()) * 16;
        EXPECT_LE(st.max_ndis_per_query, ef * (1 + h.capacity(0)) + descent + 1);
        EXPECT_GT(st.ndis, 0u);
    }
}

TEST(Hnsw, InnerProductAndContracts) {
    auto x = gaussian(2000, 8, 10), q = gaussian(50, 8, 11);
    HnswIndex h(8, 16, Metric::inner_product());
    h.add(x);
    SearchParams p;
    p.ef_search = 200;
    auto gt = vxt::naive_knn(x, q, 1, Metric::inner_product());
    EXPECT_GE(knn_recall(h.search(q, 1, p), gt, 1, 1), 0.9);
    p.ef_search = 4;
    EXPECT_THROW(h.search(q, 10, p), Error);
    std::vector<idx_t> rm{1};
    try {
        h.remove_ids(rm);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Unsupported);
    }
    EXPECT_THROW(HnswIndex(8, 16, Metric(MetricKind::L1)), Error);
}

TEST(Binary, Binarize) {
    VectorSet x(1, 8, {1, -1, 2, -3, 4, -5, 6, -7});
    auto b = binarize(x);
    EXPECT_EQ(b.data[0], 0b01010101);
    VectorSet flat(3, 8, std::vector<float>(24, 2.0f));
    std::vector<float> th(8, 2.0f);
    auto z = binarize(flat, th);
    for (auto byte : z.data) EXPECT_EQ(byte, 0);
    EXPECT_THROW(BinaryVectorSet(1, 12), Error);
}

TEST(Binary, MedianThresholdsBalanceBits) {
    auto x = gaussian(1001, 16, 12);
    for (size_t i = 0; i < x.n; ++i) x.ptr(i)[3] = std::exp(x.ptr(i)[3]);
    auto th = train_median_thresholds(x);
    auto b = binarize(x, th);
    for (size_t j = 0; j < 16; ++j) {
        size_t ones = 0;
        for (size_t i = 0; i < b.n; ++i) ones += (b.ptr(i)[j / 8] >> (j % 8)) & 1;
        double rate = double(ones) / double(b.n);
        EXPECT_GE(rate, 0.4);
        EXPECT_LE(rate, 0.6);
    }
}

TEST(Binary, Hamming) {
    std::vector<std::uint8_t> a{0b1010}, b{0b0011};
    EXPECT_EQ(hamming(a, b), 2);
    EXPECT_EQ(hamming(a, a), 0);
    vx::Rng rng(13);
    for (int t = 0; t < 200; ++t) {
        std::vector<std::uint8_t> u(8), v(8);
        for (auto& c : u) c = std::uint8_t(rng());
        for (auto& c : v) c = std::uint8_t(rng());
        int naive = 0;
        for (size_t i = 0; i < 64; ++i) naive += ((u[i / 8] >> (i % 8)) & 1) != ((v[i / 8] >> (i % 8)) & 1);
        EXPECT_EQ(hamming(u, v), naive);
    }
}

TEST(Binary, FlatIndexMatchesNaive) {
    vx::Rng rng(14);
    BinaryVectorSet db(10000, 128), q(20, 128);
    for (auto& c : db.data) c = std::uint8_t(rng());
    for (auto& c : q.data) c = std::uint8_t(rng());
    BinaryFlatIndex idx(128);
    idx.add(db);
    auto r = idx.search(q, 10);
    for (size_t qi = 0; qi < q.n; ++qi) {
        std::vector<std::pair<int, idx_t>> all;
        for (size_t i = 0; i < db.n; ++i) {
            int h = 0;
            for (size_t b = 0; b < 16; ++b) h += __builtin_popcount(unsigned(q.ptr(qi)[b] ^ db.ptr(i)[b]));
            all.push_back({h, idx_t(i)});
        }
        std::sort(all.begin(), all.end());
        for (size_t j = 0; j < 10; ++j) {
            EXPECT_EQ(r.ids_of(qi)[j], all[j].second);
            EXPECT_EQ(r.distances_of(qi)[j], float(all[j].first));
        }
    }
    BinaryVectorSet self(1, 128, std::vector<std::uint8_t>(db.ptr(42), db.ptr(42) + 16));
    auto s = idx.search(self, 1);
    EXPECT_EQ(s.ids[0], 42);
    EXPECT_EQ(s.distances[0], 0.0f);
}

TEST(Binary, FullSearchSortedByHammingThenId) {
    vx::Rng rng(15);
    BinaryVectorSet db(50, 16);
    for (auto& c : db.data) c = std::uint8_t(rng() & 0x0f);
    BinaryFlatIndex idx(16);
    idx.add(db);
    auto r = idx.search(BinaryVectorSet(1, 16), 50);
    std::set<idx_t> ids(r.ids.begin(), r.ids.end());
    EXPECT_EQ(ids.size(), 50u);
    for (size_t j = 1; j < 50; ++j) {
        EXPECT_TRUE(r.distances[j - 1] < r.distances[j] ||
                    (r.distances[j - 1] == r.distances[j] && r.ids[j - 1] < r.ids[j]));
    }
}

TEST(Binary, SerializationRoundTrip) {
    vx::Rng rng(16);
    BinaryVectorSet db(100, 64);
    for (auto& c : db.data) c = std::uint8_t(rng());
    BinaryFlatIndex idx(64);
    idx.add(db);
    auto back = read_binary_index(write_binary_index(idx));
    EXPECT_EQ(back.codes(), idx.codes());
}

namespace {
std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (size_t i = 0; i < order.size();) {
        size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        for (size_t t = i; t <= j; ++t) r[order[t]] = 0.5 * double(i + j);
        i = j + 1;
    }
    return r;
}
} // namespace

// Pairs span the full angle range: y = cos(t) x + sin(t) z with t uniform.
TEST(Binary, HammingTracksAngleAfterRotation) {
    const size_t d = 256;
    auto rot = random_rotation(d, 17);
    auto a = gaussian(1000, d, 18), z = gaussian(1000, d, 19);
    VectorSet b(1000, d);
    vx::Rng rng(20);
    std::uniform_real_distribution<double> u(0, M_PI);
    for (size_t i = 0; i < 1000; ++i) {
        double t = u(rng);
        for (size_t j = 0; j < d; ++j) b.ptr(i)[j] = float(std::cos(t) * a.ptr(i)[j] + std::sin(t) * z.ptr(i)[j]);
    }
    auto ba = binarize(rot.apply(a)), bb = binarize(rot.apply(b));
    std::vector<double> ham, ang;
    for (size_t i = 0; i < 1000; ++i) {
        ham.push_back(hamming_unchecked(ba.ptr(i), bb.ptr(i), ba.code_size()));
        double c = inner_product(a.ptr(i), b.ptr(i), d) /
                   std::sqrt(double(squared_norm(a.ptr(i), d)) * squared_norm(b.ptr(i), d));
        ang.push_back(std::acos(std::clamp(c, -1.0, 1.0)));
    }
    auto rh = ranks(ham), ra = ranks(ang);
    double mh = 0, ma = 0, sab = 0, saa = 0, sbb = 0;
    for (size_t i = 0; i < 1000; ++i) {
        mh += rh[i] / 1000;
        ma += ra[i] / 1000;
    }
    for (size_t i = 0; i < 1000; ++i) {
        sab += (rh[i] - mh) * (ra[i] - ma);
        saa += (rh[i] - mh) * (rh[i] - mh);
        sbb += (ra[i] - ma) * (ra[i] - ma);
    }
    EXPECT_GE(sab / std::sqrt(saa * sbb), 0.8);
}
