#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "test_util.hpp"
#include "vx/filter/selectors.hpp"
#include "vx/filter/words.hpp"
#include "vx/flat/flat_index.hpp"
#include "vx/ivf/ivf_index.hpp"
#include "vx/tune/explorer.hpp"

using namespace vx;
using vxt::gaussian;

namespace {

std::vector<WordSet> zipf_corpus(size_t n, size_t vocab, double mean_words, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> w(vocab);
    for (size_t i = 0; i < vocab; ++i) w[i] = 1.0 / double(i + 1);
    std::discrete_distribution<std::uint32_t> word(w.begin(), w.end());
    std::poisson_distribution<size_t> count(mean_words);
    std::vector<WordSet> items(n);
    for (auto& it : items) {
        size_t c = std::max<size_t>(1, count(rng));
        for (size_t j = 0; j < c; ++j) it.push_back(word(rng));
    }
    return items;
}

std::vector<WordSet> word_queries(size_t nq, size_t vocab, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_int_distribution<std::uint32_t> w(0, std::uint32_t(vocab - 1));
    std::vector<WordSet> q(nq);
    for (size_t i = 0; i < nq; ++i) {
        q[i] = {w(rng)};
        if (i % 2) q[i].push_back(w(rng));
    }
    return q;
}

// Brute force over the rows passing `keep`.
SearchResult filtered_oracle(const VectorSet& base, const VectorSet& q, size_t k, const std::function<bool(idx_t)>& keep) {
    SearchResult out(q.n, k, Metric::l2().worst_value());
    for (size_t qi = 0; qi < q.n; ++qi) {
        std::vector<std::pair<double, idx_t>> all;
        for (size_t i = 0; i < base.n; ++i) {
            if (!keep(idx_t(i))) continue;
            double s = 0;
            for (size_t j = 0; j < base.d; ++j) {
                double t = double(q.ptr(qi)[j]) - base.ptr(i)[j];
                s += t * t;
            }
            all.push_back({s, idx_t(i)});
        }
        std::sort(all.begin(), all.end());
        for (size_t j = 0; j < k && j < all.size(); ++j) {
            out.ids_of(qi)[j] = all[j].second;
            out.distances_of(qi)[j] = float(all[j].first);
        }
    }
    return out;
}

std::set<idx_t> row_set(const SearchResult& r, size_t qi) {
    std::set<idx_t> s;
    for (auto id : r.ids_of(qi)) {
        if (id >= 0) s.insert(id);
    }
    return s;
}

} // namespace

TEST(Signature, Packing) {
    WordSignatureTable t(10, 1000, 0.3, 5);
    EXPECT_EQ(t.id_bits(), 10u);
    EXPECT_EQ(t.signature_bits(), 53u);
    WordSet none, one{3}, two{3, 7};
    EXPECT_EQ(pack_id_signature(17, none, t), 17);
    EXPECT_EQ(t.signature_of_composite(pack_id_signature(17, one, t)), t.signature(3));
    EXPECT_EQ(t.signature_of_composite(pack_id_signature(17, two, t)), t.signature(3) | t.signature(7));
    for (std::uint32_t w = 0; w < 10; ++w) EXPECT_EQ(t.signature(w) >> t.signature_bits(), 0u);
    EXPECT_THROW(pack_id_signature(1024, one, t), Error);

    WordSignatureTable same(10, 1000, 0.3, 5);
    for (std::uint32_t w = 0; w < 10; ++w) EXPECT_EQ(same.signature(w), t.signature(w));
}

TEST(Signature, CompositeIdRoundTrip) {
    WordSignatureTable t(50, 5000, 0.2, 1);
    Rng rng(2);
    std::uniform_int_distribution<std::uint32_t> w(0, 49);
    for (idx_t id = 0; id < 5000; ++id) {
        WordSet ws{w(rng), w(rng), w(rng)};
        auto c = pack_id_signature(id, ws, t);
        EXPECT_GE(c, 0);
        EXPECT_EQ(t.id_of(c), id);
    }
}

TEST(Signature, PrefilterExamples) {
    const std::uint64_t s1 = 0b0011, s2 = 0b0100, sq = s1 | s2;
    EXPECT_TRUE(signature_prefilter(sq, 0b0111));
    EXPECT_TRUE(signature_prefilter(sq, 0b1111));
    EXPECT_FALSE(signature_prefilter(sq, 0b0011));

    // Item holds w1 and w3 but not w2; w3's bits alias w2's.
    WordSignatureTable t(3, 4, 0.0, 0);
    t.set_signature(0, s1);
    t.set_signature(1, s2);
    t.set_signature(2, 0b0110);
    WordPostings post(3, {{0, 2}, {0, 1}, {1}, {2}});
    WordSet q{0, 1};
    auto item0 = t.signature_of(post.words_of(0));
    EXPECT_TRUE(signature_prefilter(t.signature_of(q), item0));
    EXPECT_FALSE(post.contains_all(0, q));
    EXPECT_TRUE(post.contains_all(1, q));
    WordQuerySelector sel(t, post, q);
    EXPECT_FALSE(sel.is_member(pack_id_signature(0, post.words_of(0), t)));
    EXPECT_TRUE(sel.is_member(pack_id_signature(1, post.words_of(1), t)));
}

TEST(Signature, SoundnessOnRandomPairs) {
    Rng rng(3);
    std::uniform_int_distribution<std::uint32_t> w(0, 199);
    for (double p : {0.05, 0.1, 0.3}) {
        WordSignatureTable t(200, 100000, p, 7);
        for (int trial = 0; trial < 20000; ++trial) {
            WordSet item;
            size_t c = 1 + rng() % 12;
            for (size_t j = 0; j < c; ++j) item.push_back(w(rng));
            WordSet q{item[rng() % item.size()]};
            if (trial % 2) q.push_back(item[rng() % item.size()]);
            ASSERT_TRUE(signature_prefilter(t.signature_of(q), t.signature_of(item)));
        }
    }
}

TEST(Signature, ZeroRateAndDisjointBits) {
    auto items = zipf_corpus(500, 30, 3, 4);
    WordPostings post(30, items);
    auto qs = word_queries(40, 30, 5);

    WordSignatureTable zero(30, 500, 0.0, 1);
    auto z = prefilter_stats(zero, post, qs);
    EXPECT_GT(z.non_matching, 0u);
    EXPECT_EQ(z.false_passes, z.non_matching);
    EXPECT_DOUBLE_EQ(prefilter_hit_rate(zero, post, qs), 1.0);

    WordSignatureTable disjoint(30, 500, 0.0, 1);
    for (std::uint32_t i = 0; i < 30; ++i) disjoint.set_signature(i, std::uint64_t{1} << i);
    auto d = prefilter_stats(disjoint, post, qs);
    EXPECT_EQ(d.false_passes, 0u);
    EXPECT_DOUBLE_EQ(d.rejection_rate(), 1.0);
}

TEST(Signature, InteriorRateBeatsHalf) {
    auto items = zipf_corpus(3000, 2000, 8, 6);
    WordPostings post(2000, items);
    auto qs = word_queries(100, 2000, 7);
    std::vector<double> rej;
    for (double p : {0.05, 0.1, 0.2, 0.5}) {
        WordSignatureTable t(2000, 3000, p, 8);
        rej.push_back(prefilter_stats(t, post, qs).rejection_rate());
    }
    EXPECT_GT(std::max({rej[0], rej[1], rej[2]}), rej[3]);
    EXPECT_GT(rej[1], rej[3]);
}

TEST(Planner, Estimator) {
    // Two words with 1000 and 2000 postings over 1e7 items.
    const size_t n = 10000000;
    std::vector<WordSet> rows(n);
    for (size_t i = 0; i < 1000; ++i) rows[i * 7].push_back(0);
    for (size_t i = 0; i < 2000; ++i) rows[i * 5].push_back(1);
    WordPostings post(2, std::move(rows));
    WordSet both{0, 1};
    auto plan = plan_filtered_query(both, post);
    EXPECT_DOUBLE_EQ(plan.estimate, 1000.0 * 2000.0 / 1e7);
    EXPECT_LT(plan.estimate / double(n), 3e-4);
    EXPECT_EQ(plan.kind, FilterPlanKind::MetadataFirst);
    EXPECT_EQ(plan.candidates, post.intersect(both));
    for (auto c : plan.candidates) EXPECT_TRUE(post.contains_all(size_t(c), both));
}

TEST(Planner, CommonWordAndUnknownWord) {
    std::vector<WordSet> rows(1000);
    for (size_t i = 0; i < 1000; i += 2) rows[i].push_back(0);
    for (size_t i = 0; i < 3; ++i) rows[i].push_back(1);
    WordPostings post(3, rows);
    WordSet common{0};
    EXPECT_EQ(plan_filtered_query(common, post).kind, FilterPlanKind::VectorFirst);
    EXPECT_DOUBLE_EQ(plan_filtered_query(common, post).estimate, 500.0);
    WordSet rare{1};
    EXPECT_EQ(plan_filtered_query(rare, post, 0.01).kind, FilterPlanKind::MetadataFirst);
    WordSet unknown{2}, outside{9};
    EXPECT_EQ(plan_filtered_query(unknown, post).kind, FilterPlanKind::Empty);
    EXPECT_EQ(plan_filtered_query(outside, post).kind, FilterPlanKind::Empty);
    WordSet three{0, 1, 1, 0};
    // Duplicates collapse to two words: S = 500 * 3 / 1000.
    EXPECT_DOUBLE_EQ(plan_filtered_query(three, post).estimate, 1.5);
    EXPECT_EQ(plan_filtered_query(three, post, 0.01).kind, FilterPlanKind::MetadataFirst);
    WordSet empty;
    EXPECT_THROW(plan_filtered_query(empty, post), Error);
}

TEST(Selectors, AcceptAllAndSingleId) {
    auto x = gaussian(3000, 8, 9), q = gaussian(20, 8, 10);
    IvfIndex ivf(8, 16);
    ivf.train(x);
    ivf.add(x);
    SearchParams p;
    p.nprobe = 4;
    IdSelectorCallback all([](idx_t) { return true; });
    auto plain = ivf.search(q, 10, p);
    p.selector = &all;
    EXPECT_EQ(ivf.search(q, 10, p), plain);

    std::vector<idx_t> one{1234};
    IdSelectorSet single(one);
    p.selector = &single;
    p.nprobe = 16;
    auto r = ivf.search(q, 5, p);
    for (size_t qi = 0; qi < q.n; ++qi) {
        EXPECT_EQ(r.ids_of(qi)[0], 1234);
        for (size_t j = 1; j < 5; ++j) EXPECT_EQ(r.ids_of(qi)[j], -1);
    }
}

TEST(Selectors, FilteredSearchEqualsRestrictedBruteForce) {
    auto x = gaussian(10000, 16, 11), q = gaussian(30, 16, 12);
    std::vector<std::uint8_t> bits(10000 / 8);
    Rng rng(13);
    for (auto& b : bits) b = std::uint8_t(rng());
    IdSelectorBitmap bitmap(bits);
    IdSelectorRange range(2500, 4000);
    FlatIndex flat(16);
    flat.add(x);
    IvfIndex ivf(16, 32);
    ivf.train(x);
    ivf.add(x);
    for (const IdSelector* sel : {static_cast<const IdSelector*>(&bitmap), static_cast<const IdSelector*>(&range)}) {
        auto oracle = filtered_oracle(x, q, 10, [&](idx_t i) { return sel->is_member(i); });
        SearchParams p;
        p.selector = sel;
        p.nprobe = 32;
        auto a = flat.search(q, 10, p), b = ivf.search(q, 10, p);
        for (size_t qi = 0; qi < q.n; ++qi) {
            EXPECT_EQ(row_set(a, qi), row_set(oracle, qi));
            EXPECT_EQ(row_set(b, qi), row_set(oracle, qi));
        }
    }
}

TEST(Selectors, WordQueryEqualsExactPredicateOracle) {
    const size_t n = 10000, vocab = 300;
    auto x = gaussian(n, 8, 14), q = gaussian(1, 8, 15);
    auto items = zipf_corpus(n, vocab, 5, 16);
    WordPostings post(vocab, items);
    WordSignatureTable table(vocab, n, 0.1, 17);
    std::vector<idx_t> ids(n);
    for (size_t i = 0; i < n; ++i) ids[i] = pack_id_signature(idx_t(i), post.words_of(i), table);
    FlatIndex flat(8);
    flat.add_with_ids(x, ids);
    for (const auto& words : word_queries(40, 20, 18)) {
        auto r = vector_first_search(flat, table, post, q, 10, words);
        auto oracle = filtered_oracle(x, q, 10, [&](idx_t i) { return post.contains_all(size_t(i), words); });
        EXPECT_EQ(row_set(r, 0), row_set(oracle, 0));
    }
}

TEST(Planner, PlansAgreeWithOracle) {
    const size_t n = 5000, vocab = 200;
    auto x = gaussian(n, 8, 19), q = gaussian(1, 8, 20);
    auto items = zipf_corpus(n, vocab, 4, 21);
    WordPostings post(vocab, items);
    WordSignatureTable table(vocab, n, 0.1, 22);
    std::vector<idx_t> ids(n);
    for (size_t i = 0; i < n; ++i) ids[i] = pack_id_signature(idx_t(i), post.words_of(i), table);
    IvfIndex ivf(8, 16);
    ivf.train(x);
    ivf.add_with_ids(x, ids);
    SearchParams p;
    p.nprobe = 16;
    for (const auto& words : word_queries(60, vocab, 23)) {
        auto vf = vector_first_search(ivf, table, post, q, 10, words, p);
        auto mf = metadata_first_search(x, Metric::l2(), q, 10, post.intersect(words));
        auto oracle = filtered_oracle(x, q, 10, [&](idx_t i) { return post.contains_all(size_t(i), words); });
        EXPECT_EQ(row_set(vf, 0), row_set(mf, 0));
        EXPECT_EQ(row_set(mf, 0), row_set(oracle, 0));
        auto planned = filtered_word_search(ivf, x, table, post, q, 10, words, p);
        EXPECT_EQ(row_set(planned, 0), row_set(oracle, 0));
    }
}

namespace {

OperatingPoint pt(size_t id, double s, double a) { return {{id}, s, a}; }

std::vector<size_t> setting_ids(const std::vector<OperatingPoint>& f) {
    std::vector<size_t> out;
    for (const auto& p : f) out.push_back(p.setting[0]);
    std::sort(out.begin(), out.end());
    return out;
}

// Speed falls and accuracy rises along every axis.
struct MonotoneEvaluator {
    std::vector<std::vector<double>> ds, da;

    MonotoneEvaluator(const ParameterSpace& space, std::uint64_t seed) {
        Rng rng(seed);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (const auto& ax : space.axes()) {
            std::vector<double> s(ax.values.size()), a(ax.values.size());
            double cs = 0, ca = 0;
            for (size_t i = 0; i < s.size(); ++i) {
                cs += u(rng);
                ca += u(rng);
                s[i] = -cs;
                a[i] = ca;
            }
            ds.push_back(s);
            da.push_back(a);
        }
    }

    Measurement operator()(const ParameterSpace::Setting& s) const {
        // Multiplicative speed skews the trade-off so pruning has room.
        double sp = 1, ac = 0;
        for (size_t i = 0; i < s.size(); ++i) {
            sp *= std::exp(ds[i][s[i]]);
            ac += da[i][s[i]];
        }
        return {sp, 1 - std::exp(-ac)};
    }
};

std::vector<OperatingPoint> exhaustive(const ParameterSpace& space, const Evaluator& eval) {
    std::vector<OperatingPoint> all;
    for (size_t f = 0; f < space.size(); ++f) {
        auto s = space.setting(f);
        auto m = eval(s);
        all.push_back({s, m.speed, m.accuracy});
    }
    return pareto_frontier(all);
}

ParameterSpace grid(std::vector<size_t> sizes) {
    std::vector<Axis> axes;
    for (size_t i = 0; i < sizes.size(); ++i) {
        Axis a{"a" + std::to_string(i), {}};
        for (size_t j = 0; j < sizes[i]; ++j) a.values.push_back(double(j + 1));
        axes.push_back(a);
    }
    return ParameterSpace(axes);
}

std::vector<ParameterSpace::Setting> settings_of(std::vector<OperatingPoint> f) {
    std::vector<ParameterSpace::Setting> s;
    for (auto& p : f) s.push_back(p.setting);
    std::sort(s.begin(), s.end());
    return s;
}

} // namespace

TEST(Pareto, Examples) {
    EXPECT_EQ(setting_ids(pareto_frontier({pt(0, 1, 0.9), pt(1, 2, 0.8), pt(2, 3, 0.7)})), (std::vector<size_t>{0, 1, 2}));
    EXPECT_EQ(setting_ids(pareto_frontier({pt(0, 1, 0.9), pt(1, 2, 0.95)})), (std::vector<size_t>{1}));
    // Equal on one coordinate is not strict dominance.
    EXPECT_EQ(setting_ids(pareto_frontier({pt(0, 1, 0.9), pt(1, 2, 0.9)})), (std::vector<size_t>{0, 1}));
    EXPECT_EQ(setting_ids(pareto_frontier({pt(4, 1, 0.9), pt(2, 1, 0.9)})), (std::vector<size_t>{2}));
    EXPECT_TRUE(pareto_frontier({}).empty());
}

TEST(Pareto, MatchesQuadraticOracle) {
    Rng rng(24);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<OperatingPoint> pts;
    for (size_t i = 0; i < 500; ++i) pts.push_back(pt(i, std::round(u(rng) * 50), std::round(u(rng) * 50) / 50));
    std::vector<size_t> want;
    for (size_t i = 0; i < pts.size(); ++i) {
        bool dom = false, dup = false;
        for (size_t j = 0; j < pts.size(); ++j) {
            dom |= pts[j].speed > pts[i].speed && pts[j].accuracy > pts[i].accuracy;
            dup |= j < i && pts[j].speed == pts[i].speed && pts[j].accuracy == pts[i].accuracy;
        }
        if (!dom && !dup) want.push_back(i);
    }
    auto f = pareto_frontier(pts);
    EXPECT_EQ(setting_ids(f), want);
    for (size_t i = 1; i < f.size(); ++i) EXPECT_LE(f[i - 1].accuracy, f[i].accuracy);

    EXPECT_EQ(pareto_frontier(f), f);
    std::shuffle(pts.begin(), pts.end(), rng);
    EXPECT_EQ(pareto_frontier(pts), f);
}

TEST(Explore, SingleAxisEvaluatesEverything) {
    auto space = grid({12});
    auto res = explore(space, [](const auto& s) { return Measurement{10.0 - double(s[0]), double(s[0]) / 12}; }, 3);
    EXPECT_EQ(res.evaluated.size(), 12u);
    EXPECT_EQ(res.frontier.size(), 12u);
    EXPECT_EQ(res.skipped, 0u);
}

TEST(Explore, ConstantEvaluatorSinglePoint) {
    auto space = grid({3, 3});
    auto res = explore(space, [](const auto&) { return Measurement{1.0, 0.5}; }, 4);
    ASSERT_EQ(res.frontier.size(), 1u);
    EXPECT_EQ(res.frontier[0].setting, (ParameterSpace::Setting{0, 0}));
}

TEST(Explore, FrontierEqualsExhaustive) {
    auto space = grid({4, 4, 4});
    MonotoneEvaluator ev(space, 25);
    auto res = explore(space, std::cref(ev), 26);
    EXPECT_EQ(settings_of(res.frontier), settings_of(exhaustive(space, std::cref(ev))));
    EXPECT_LT(res.evaluated.size(), 64u);
    EXPECT_EQ(res.evaluated.size() + res.skipped, 64u);
}

TEST(Explore, RandomMonotoneSpaces) {
    Rng rng(27);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        std::vector<size_t> sizes;
        size_t dims = 1 + rng() % 3;
        for (size_t i = 0; i < dims; ++i) sizes.push_back(2 + rng() % 5);
        auto space = grid(sizes);
        MonotoneEvaluator ev(space, 100 + seed);
        auto res = explore(space, std::cref(ev), seed);
        EXPECT_EQ(settings_of(res.frontier), settings_of(exhaustive(space, std::cref(ev)))) << "seed " << seed;
    }
}

TEST(Explore, ErrorCarriesSetting) {
    auto space = grid({3, 3});
    try {
        explore(space, [](const auto& s) -> Measurement {
            if (s[0] == 2 && s[1] == 1) throw std::runtime_error("boom");
            return {1.0 / double(1 + s[0] + s[1]), double(s[0] + s[1])};
        });
        FAIL();
    } catch (const EvaluationError& e) {
        EXPECT_EQ(e.setting(), (ParameterSpace::Setting{2, 1}));
        EXPECT_NE(std::string(e.what()).find("a0=3"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("boom"), std::string::npos);
    }
}

TEST(Explore, SpaceValidation) {
    EXPECT_THROW(ParameterSpace({Axis{"x", {1, 1}}}), Error);
    EXPECT_THROW(ParameterSpace({Axis{"x", {}}}), Error);
    auto s = grid({2, 3});
    EXPECT_EQ(s.size(), 6u);
    EXPECT_EQ(s.setting(4), (ParameterSpace::Setting{1, 1}));
}
