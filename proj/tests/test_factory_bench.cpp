#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>

#include "test_util.hpp"
#include "vx/bench/eval.hpp"
#include "vx/bench/report.hpp"
#include "vx/bench/synth.hpp"
#include "vx/bench/vecs_io.hpp"
#include "vx/core/accuracy.hpp"
#include "vx/factory/factory.hpp"
#include "vx/factory/index_io.hpp"

using namespace vx;
using vxt::gaussian;

TEST(FactoryParse, Examples) {
    auto a = parse_factory_spec("IVF4096,PQ8x8");
    EXPECT_EQ(a.main, FactorySpec::Main::IVF);
    EXPECT_EQ(a.nlist, 4096u);
    EXPECT_EQ(a.codec, (CodecSpec{CodecKind::PQ, 0, 8, 8}));
    EXPECT_FALSE(a.refine);

    auto b = parse_factory_spec("PCA160,IVF20000_HNSW,PQ20x10,RFlat");
    ASSERT_EQ(b.transforms.size(), 1u);
    EXPECT_EQ(b.transforms[0], (TransformSpec{TransformSpec::Kind::PCA, 160}));
    EXPECT_EQ(b.nlist, 20000u);
    EXPECT_TRUE(b.ivf_hnsw);
    EXPECT_EQ(b.hnsw_m, kFactoryDefaults.hnsw_m);
    EXPECT_EQ(b.codec, (CodecSpec{CodecKind::PQ, 0, 20, 10}));
    EXPECT_TRUE(b.refine);

    EXPECT_EQ(parse_factory_spec("Flat").main, FactorySpec::Main::Flat);
    EXPECT_EQ(render_factory(parse_factory_spec("IVF256,SQ8")), "IVF256,SQ8");
    EXPECT_EQ(render_factory(parse_factory_spec("IVF256")), "IVF256,Flat");
    EXPECT_EQ(render_factory(parse_factory_spec("HNSW")), "HNSW32");
    EXPECT_EQ(render_factory(parse_factory_spec("RR,PRQ2x4x6,RFlat")), "RR,PRQ2x4x6,RFlat");
}

TEST(FactoryParse, BuildsWiredIndexes) {
    auto ivf = parse_factory("IVF16,PQ4x8", 16);
    auto* p = dynamic_cast<IvfIndex*>(ivf.get());
    ASSERT_NE(p, nullptr);
    EXPECT_TRUE(p->by_residual);
    EXPECT_FALSE(p->is_trained());
    auto flat = parse_factory("Flat", 8);
    EXPECT_NE(dynamic_cast<FlatIndex*>(flat.get()), nullptr);
    EXPECT_EQ(render_factory(*flat), "Flat");
    auto chain = parse_factory("PCA8,IVF32_HNSW16,SQ8,RFlat", 16);
    EXPECT_EQ(render_factory(*chain), "PCA8,IVF32_HNSW16,SQ8,RFlat");
    EXPECT_EQ(chain->d(), 16u);
}

TEST(FactoryParse, PositionedErrors) {
    auto pos = [](const char* s) {
        try {
            parse_factory_spec(s);
        } catch (const FactoryParseError& e) {
            return e.position();
        }
        return size_t(~0);
    };
    EXPECT_EQ(pos(""), 0u);
    EXPECT_EQ(pos("IVF"), 3u);
    EXPECT_EQ(pos("IVF64,QQ8"), 6u);
    EXPECT_EQ(pos("Flat,"), 5u);
    EXPECT_EQ(pos("Flat;"), 4u);
    EXPECT_EQ(pos("PQ8"), 3u);
    // Semantic checks happen at build time.
    EXPECT_THROW(parse_factory("PQ5x8", 16), Error);
    EXPECT_THROW(parse_factory("PCA32,Flat", 16), Error);
}

namespace {

std::string random_valid(Rng& rng) {
    auto pick = [&](size_t n) { return size_t(rng() % n); };
    const size_t dims[] = {4, 8, 16};
    std::string s;
    size_t nt = pick(3);
    for (size_t i = 0; i < nt; ++i) {
        if (pick(2)) s += "PCA" + std::to_string(dims[pick(3)]) + ",";
        else s += pick(2) ? "RR," : "RR" + std::to_string(dims[pick(3)]) + ",";
    }
    auto codec = [&]() -> std::string {
        switch (pick(5)) {
            case 0: return "PQ" + std::to_string(1 + pick(8)) + "x" + std::to_string(1 + pick(12));
            case 1: return "SQ" + std::to_string(4 + 2 * pick(3));
            case 2: return "RQ" + std::to_string(1 + pick(8)) + "x" + std::to_string(1 + pick(12));
            case 3: return "LSQ" + std::to_string(1 + pick(8)) + "x" + std::to_string(1 + pick(12));
            default:
                return "PRQ" + std::to_string(1 + pick(4)) + "x" + std::to_string(1 + pick(4)) + "x" +
                       std::to_string(1 + pick(12));
        }
    };
    switch (pick(4)) {
        case 0: s += "Flat"; break;
        case 1: s += pick(2) ? "HNSW" : "HNSW" + std::to_string(2 + pick(60)); break;
        case 2: s += codec(); break;
        default:
            s += "IVF" + std::to_string(1 + pick(5000));
            if (pick(2)) s += pick(2) ? "_HNSW" : "_HNSW" + std::to_string(2 + pick(60));
            if (pick(3)) s += "," + (pick(4) ? codec() : std::string("Flat"));
    }
    if (pick(2)) s += ",RFlat";
    return s;
}

} // namespace

TEST(FactoryParse, RenderIsAFixpoint) {
    Rng rng(1);
    for (int i = 0; i < 50; ++i) {
        auto s = random_valid(rng);
        auto spec = parse_factory_spec(s);
        auto r1 = render_factory(spec);
        EXPECT_EQ(parse_factory_spec(r1), spec) << s;
        EXPECT_EQ(render_factory(parse_factory_spec(r1)), r1) << s;
    }
}

TEST(FactoryParse, FuzzNeverCrashes) {
    Rng rng(2);
    const std::string alphabet = "IVFPQRSLHNSWCAlatxFR_,0123456789";
    const char* tokens[] = {"IVF", "PQ", "SQ", "RQ", "LSQ", "PRQ", "HNSW", "Flat", "RFlat", "PCA", "RR", "_", ",", "x", "8", "16", "99999999999999999999"};
    size_t parsed = 0;
    for (int i = 0; i < 100000; ++i) {
        std::string s;
        size_t len = rng() % 24;
        int mode = i % 3;
        for (size_t j = 0; j < len; ++j) {
            if (mode == 0) s += char(rng() % 256);
            else if (mode == 1) s += alphabet[rng() % alphabet.size()];
            else s += tokens[rng() % std::size(tokens)];
        }
        try {
            parse_factory_spec(s);
            ++parsed;
        } catch (const FactoryParseError& e) {
            ASSERT_LE(e.position(), s.size());
        }
    }
    EXPECT_GT(parsed, 0u);
}

namespace {

void expect_index_roundtrip(const Index& idx, const VectorSet& q, size_t k, SearchParams p = {}) {
    auto bytes = write_index(idx);
    auto back = read_index(bytes);
    EXPECT_EQ(back->type_name(), idx.type_name());
    EXPECT_EQ(back->ntotal(), idx.ntotal());
    EXPECT_EQ(back->search(q, k, p), idx.search(q, k, p));
    EXPECT_EQ(write_index(*back), bytes);
}

} // namespace

TEST(Serialization, EmptyFlat) {
    FlatIndex f(12, Metric::inner_product());
    auto back = read_index(write_index(f));
    EXPECT_EQ(back->d(), 12u);
    EXPECT_EQ(back->metric(), Metric::inner_product());
    EXPECT_EQ(back->ntotal(), 0u);
}

TEST(Serialization, IvfPqBitIdentical) {
    auto x = gaussian(10000, 16, 3), q = gaussian(100, 16, 4);
    auto idx = parse_factory("IVF64,PQ4x8", 16);
    idx->train(x);
    idx->add(x);
    SearchParams p;
    p.nprobe = 8;
    expect_index_roundtrip(*idx, q, 10, p);
    EXPECT_EQ(write_index(*idx), write_index(*idx));
}

TEST(Serialization, EveryFactoryFamily) {
    auto x = gaussian(3000, 16, 5), q = gaussian(20, 16, 6);
    for (const char* s : {"Flat", "HNSW8", "SQ6", "PQ4x6", "RQ2x6", "LSQ2x4", "PRQ2x2x5", "IVF16,Flat", "IVF16_HNSW8,SQ4",
                          "PCA8,IVF16,PQ2x8,RFlat", "RR,Flat"}) {
        SCOPED_TRACE(s);
        auto idx = parse_factory(s, 16);
        idx->train(x);
        idx->add(x);
        expect_index_roundtrip(*idx, q, 5);
        EXPECT_EQ(render_factory(*read_index(write_index(*idx))), render_factory(parse_factory_spec(s)));
    }
}

TEST(Serialization, RejectsCorruptStreams) {
    auto x = gaussian(500, 8, 7);
    auto idx = parse_factory("IVF8,SQ8", 8);
    idx->train(x);
    idx->add(x);
    auto bytes = write_index(*idx);
    ASSERT_EQ(std::memcmp(bytes.data(), "VXIDX001", 8), 0);

    auto kind_of = [](const std::vector<std::uint8_t>& b) {
        try {
            read_index(b);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::Io;
    };
    auto bad = bytes;
    bad[0] = 'W';
    EXPECT_EQ(kind_of(bad), ErrorKind::Format);
    bad = bytes;
    bad[8] = 2;
    EXPECT_EQ(kind_of(bad), ErrorKind::Format);
    for (size_t len = 0; len < bytes.size(); len += 1 + len / 16) {
        std::vector<std::uint8_t> t(bytes.begin(), bytes.begin() + long(len));
        EXPECT_EQ(kind_of(t), ErrorKind::Format) << "prefix " << len;
    }
}

TEST(Serialization, FactoryEqualsHandBuilt) {
    auto x = gaussian(4000, 16, 8), q = gaussian(30, 16, 9);
    auto fac = parse_factory("IVF32,PQ4x8", 16);
    IvfIndex hand(16, 32, std::make_unique<ProductCodec>(16, 4, 8));
    fac->train(x);
    fac->add(x);
    hand.train(x);
    hand.add(x);
    EXPECT_EQ(write_index(*fac), write_index(hand));
    SearchParams p;
    p.nprobe = 4;
    EXPECT_EQ(fac->search(q, 10, p), hand.search(q, 10, p));
}

TEST(Vecs, ExactLayoutAndRoundTrip) {
    VectorSet one(1, 2, {1.5f, -2.0f});
    auto b = encode_fvecs(one);
    std::vector<std::uint8_t> want{0x02, 0, 0, 0, 0, 0, 0xC0, 0x3F, 0, 0, 0, 0xC0};
    EXPECT_EQ(b, want);
    EXPECT_EQ(decode_fvecs(b), one);

    Rng rng(10);
    for (size_t n : {size_t(0), size_t(1), size_t(3), size_t(17)}) {
        for (size_t d : {1, 4, 33}) {
            auto x = gaussian(n, d, n * 100 + d);
            if (n == 0) x = VectorSet(0, d);
            auto enc = encode_fvecs(x);
            EXPECT_EQ(enc.size(), n * (4 + 4 * d));
            auto back = decode_fvecs(enc);
            EXPECT_EQ(encode_fvecs(back), enc);
            if (n) {
                EXPECT_EQ(back, x);
            }
        }
    }
}

TEST(Vecs, MismatchAndTruncationNameTheRecord) {
    VectorSet x(3, 4, std::vector<float>(12, 1.0f));
    auto b = encode_fvecs(x);
    b[2 * 20] = 5;
    try {
        decode_fvecs(b);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Format);
        EXPECT_NE(std::string(e.what()).find("record 2"), std::string::npos) << e.what();
    }
    auto t = encode_fvecs(x);
    t.resize(t.size() - 3);
    EXPECT_THROW(decode_fvecs(t), Error);
}

TEST(Vecs, BvecsAndIvecs) {
    VectorSet bx(2, 3, {0, 17, 255, 1, 2, 3});
    auto enc = encode_bvecs(bx);
    EXPECT_EQ(enc.size(), 2u * 7u);
    EXPECT_EQ(decode_bvecs(enc), bx);
    EXPECT_THROW(encode_bvecs(VectorSet(1, 1, {0.5f})), Error);

    IdMatrix m{2, 3, {1, -2, 3, 4, 5, 600000}};
    EXPECT_EQ(decode_ivecs(encode_ivecs(m)), m);

    auto dir = std::filesystem::temp_directory_path() / "vx_vecs_test";
    std::filesystem::create_directories(dir);
    auto f = (dir / "a.fvecs").string();
    auto x = gaussian(5, 3, 11);
    save_fvecs(f, x);
    EXPECT_EQ(load_vectors(f), x);
    std::filesystem::remove_all(dir);
}

TEST(Synth, DeterministicPerSeed) {
    for (auto kind : {SynthKind::Gaussian, SynthKind::Uniform, SynthKind::Blobs, SynthKind::SkewedNormMips}) {
        SynthParams p;
        p.nq = 10;
        auto a = synth_dataset(kind, 200, 8, 5, p), b = synth_dataset(kind, 200, 8, 5, p);
        auto c = synth_dataset(kind, 200, 8, 6, p);
        EXPECT_EQ(encode_fvecs(a.base), encode_fvecs(b.base));
        EXPECT_EQ(encode_fvecs(a.queries), encode_fvecs(b.queries));
        EXPECT_NE(a.base, c.base);
    }
}

TEST(Synth, BlobsClassifyPerfectly) {
    SynthParams p;
    p.nblobs = 10;
    p.blob_separation = 50.0f;
    auto ds = synth_dataset(SynthKind::Blobs, 5000, 16, 12, p);
    FlatIndex centers(16);
    centers.add(ds.centers);
    auto r = centers.search(ds.base, 1);
    for (size_t i = 0; i < ds.base.n; ++i) ASSERT_EQ(r.ids[i], ds.labels[i]);
}

TEST(Synth, SkewedNormsAreSkewed) {
    auto ds = synth_dataset(SynthKind::SkewedNormMips, 20000, 16, 13);
    EXPECT_GT(norm_coefficient_of_variation(ds.base), 1.0);
    EXPECT_EQ(ds.metric, Metric::inner_product());
}

namespace {

Dataset small_ds(size_t n, size_t d, size_t nq, std::uint64_t seed, size_t gt_k = 100) {
    SynthParams p;
    p.nq = nq;
    auto ds = synth_dataset(SynthKind::Gaussian, n, d, seed, p);
    attach_ground_truth(ds, gt_k);
    return ds;
}

EvalSetting setting(std::map<std::string, double> v) { return {v, params_from_axes(v)}; }

EvalOptions quick() {
    EvalOptions o;
    o.repeats = 1;
    o.latency_queries = 5;
    return o;
}

} // namespace

TEST(Eval, FlatAndExhaustiveIvfAreExact) {
    auto ds = small_ds(3000, 8, 50, 14);
    FlatIndex flat(8);
    flat.add(ds.base);
    auto rows = run_eval(flat, ds, {setting({})}, quick());
    ASSERT_EQ(rows.size(), 1u);
    for (double r : {rows[0].r1_at_1, rows[0].r1_at_10, rows[0].r1_at_100, rows[0].r10_at_10, rows[0].r100_at_100})
        EXPECT_EQ(r, 1.0);
    EXPECT_DOUBLE_EQ(rows[0].ndis_per_query, 3000.0);
    EXPECT_EQ(rows[0].code_size, 32u);

    IvfIndex ivf(8, 16);
    ivf.train(ds.base);
    ivf.add(ds.base);
    auto ir = run_eval(ivf, ds, {setting({{"nprobe", 16}}), setting({{"nprobe", 1}})}, quick());
    EXPECT_EQ(ir[0].r1_at_1, 1.0);
    EXPECT_EQ(ir[0].r100_at_100, 1.0);
    EXPECT_LT(ir[1].r1_at_1, 1.0);
    EXPECT_DOUBLE_EQ(ir[0].ndis_per_query, 3000.0 + 16.0);
}

TEST(Eval, IvfPqRecallRisesWithNprobe) {
    auto ds = small_ds(100000, 64, 200, 15, 1);
    IvfIndex ivf(64, 256, std::make_unique<ProductCodec>(64, 8, 8));
    ivf.kmeans.niter = 10;
    ivf.train(ds.base.slice(0, 30000));
    ivf.add(ds.base);
    double prev = -1;
    for (size_t np : {1, 4, 16, 64}) {
        SearchParams p;
        p.nprobe = np;
        double r = knn_recall(ivf.search(ds.queries, 1, p), ds.ground_truth, 1, 1);
        EXPECT_GT(r, prev) << "nprobe " << np;
        prev = r;
    }
}

TEST(Eval, RecallMatchesCoreOnBothPaths) {
    auto ds = small_ds(2000, 8, 40, 16, 10);
    IvfIndex ivf(8, 32);
    ivf.train(ds.base);
    ivf.add(ds.base);
    SearchParams p;
    p.nprobe = 2;
    auto rows = run_eval(ivf, ds, {setting({{"nprobe", 2}})}, quick());
    auto r = ivf.search(ds.queries, 100, p);
    EXPECT_DOUBLE_EQ(rows[0].r1_at_1, knn_recall(r, ds.ground_truth, 1, 1));
    EXPECT_DOUBLE_EQ(rows[0].r1_at_10, knn_recall(r, ds.ground_truth, 1, 10));
    EXPECT_DOUBLE_EQ(rows[0].r10_at_10, knn_recall(r, ds.ground_truth, 10, 10));
    EXPECT_TRUE(std::isnan(rows[0].r100_at_100)) << "ground truth holds only 10 neighbors";
    EXPECT_THROW(run_eval(ivf, small_ds(10, 4, 2, 1), {setting({})}, quick()), Error);
    EXPECT_THROW(params_from_axes({{"bogus", 1}}), Error);
}

TEST(Eval, ScalingFit) {
    std::vector<std::pair<double, double>> exact, flat;
    for (double n : {1e4, 3e4, 1e5, 3e5}) {
        exact.push_back({n, 2.0 * std::pow(n, 0.5)});
        flat.push_back({n, 0.25});
    }
    auto f = fit_scaling_law(exact);
    EXPECT_NEAR(f.t0, 2.0, 1e-9);
    EXPECT_NEAR(f.alpha, 0.5, 1e-9);
    EXPECT_NEAR(fit_scaling_law(flat).alpha, 0.0, 1e-12);
    EXPECT_THROW(fit_scaling_law({{1, 1}, {2, 0}, {3, 1}}), Error);
    EXPECT_THROW(fit_scaling_law({{1, 1}, {1, 2}, {1, 3}}), Error);
}

TEST(Eval, CostModelGridArgmin) {
    std::vector<size_t> grid{250, 500, 1000, 1250, 2000, 4000};
    EXPECT_EQ(ivf_cost_argmin(grid, 16, 1e5), 1250u);
    EXPECT_EQ(grid_closest_log(grid, std::sqrt(16 * 1e5)), 1250u);
    EXPECT_EQ(grid_position(grid, 1250), 3u);

    SynthParams p;
    p.nq = 100;
    auto ds = synth_dataset(SynthKind::Uniform, 20000, 8, 17, p);
    auto rep = validate_cost_model(ds.base, ds.queries, {50, 100, 200, 400, 800}, {4}, 1, 8);
    ASSERT_EQ(rep.rows.size(), 5u);
    for (const auto& row : rep.rows) {
        EXPECT_GE(row.imbalance, 1.0);
        EXPECT_DOUBLE_EQ(row.model_ndis, double(row.k_ivf) + 4.0 * 20000.0 / double(row.k_ivf));
    }
    std::vector<size_t> ks{50, 100, 200, 400, 800};
    auto gap = long(grid_position(ks, rep.measured_argmin[4])) - long(grid_position(ks, rep.model_argmin[4]));
    EXPECT_LE(std::abs(gap), 1);
}

TEST(Report, Formats) {
    Table t({"name", "x"});
    t.add_row({std::string("a,b"), 1.5});
    t.add_row({std::string("c"), std::nan("")});
    std::ostringstream csv, jl, dat;
    t.write_csv(csv);
    t.write_jsonl(jl);
    t.write_dat(dat);
    EXPECT_EQ(csv.str(), "name,x\n\"a,b\",1.5\nc,\n");
    EXPECT_EQ(jl.str(), "{\"name\":\"a,b\",\"x\":1.5}\n{\"name\":\"c\",\"x\":null}\n");
    EXPECT_EQ(dat.str(), "# name x\na,b 1.5\nc nan\n");
    EXPECT_THROW(t.add_row({1.0}), std::invalid_argument);
}
