#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "vx/core/rng.hpp"
#include "vx/quantize/bits.hpp"
#include "vx/quantize/codec.hpp"
#include "vx/quantize/kmeans.hpp"
#include "vx/quantize/product.hpp"

namespace vx {

class ProductAdditiveCodec;

/// Additive quantizer: M full-dimensional codebooks of K = 2^nbits entries,
/// a vector decodes to the sum of one entry per codebook. Encoding is either
/// residual beam search or local search (greedy start, ICM sweeps and
/// iterated random perturbations).
class AdditiveCodec : public Codec {
public:
    enum class Variant : std::uint8_t { Residual = 0, LocalSearch = 1 };
    enum class NormMode : std::uint8_t { None = 0, StoredF32 = 1, StoredQ8 = 2, FromLUT = 3 };

    size_t beam_size = 5;
    /// Score beam candidates from precomputed codebook dot products instead
    /// of materialized residuals. Produces the same codes.
    bool use_beam_lut = false;
    size_t ils_iters = 8;
    size_t icm_iters = 4;
    size_t em_iters = 10;
    std::uint64_t encode_seed = 0x5eed;
    KMeansParams kmeans;

    AdditiveCodec(size_t d, size_t m, unsigned nbits, Variant variant = Variant::Residual,
                  NormMode norm_mode = NormMode::StoredF32)
        : Codec(d), m_(m), nbits_(nbits), variant_(variant), norm_mode_(norm_mode) {
        detail::require_arg(m >= 1, "additive codec requires M >= 1");
        detail::require_arg(nbits >= 1 && nbits <= 16, "additive codec supports 1..16 bits per codebook");
    }

    /// Block-diagonal codebooks reproducing a product codec exactly: codebook
    /// m is the m-th sub-codebook, zero outside its sub-space.
    static std::unique_ptr<AdditiveCodec> from_product(const ProductCodec& pq, Variant variant,
                                                       NormMode norm_mode = NormMode::StoredF32);

    /// Block-diagonal codebooks reproducing a product-additive codec exactly.
    static std::unique_ptr<AdditiveCodec> from_product_additive(const ProductAdditiveCodec& prq, Variant variant,
                                                                NormMode norm_mode = NormMode::StoredF32);

    size_t m() const { return m_; }
    size_t k() const { return size_t{1} << nbits_; }
    unsigned nbits() const { return nbits_; }
    Variant variant() const { return variant_; }
    NormMode norm_mode() const { return norm_mode_; }
    size_t index_code_size() const { return bytes_for_bits(m_ * nbits_); }
    size_t norm_size() const {
        return norm_mode_ == NormMode::StoredF32 ? 4 : norm_mode_ == NormMode::StoredQ8 ? 1 : 0;
    }
    size_t code_size() const override { return index_code_size() + norm_size(); }

    std::span<const float> codebooks() const { return codebooks_; }
    const float* entry(size_t m, size_t j) const { return codebooks_.data() + (m * k() + j) * d_; }
    float norm_min() const { return norm_min_; }
    float norm_max() const { return norm_max_; }

    void set_codebooks(std::vector<float> cb) {
        detail::require_arg(cb.size() == m_ * k() * d_, "codebooks must be M x K x d");
        codebooks_ = std::move(cb);
        std::lock_guard lock(cross_mutex_);
        cross_.reset();
        is_trained_ = true;
    }

    void set_norm_range(float lo, float hi) {
        norm_min_ = lo;
        norm_max_ = hi;
    }

    void train(const VectorSet& x) override {
        detail::require_dim(x.d, d_, "AdditiveCodec::train");
        detail::require_arg(x.n >= k(), "additive codec training needs at least K vectors");
        train_residual(x, false);
        if (variant_ == Variant::LocalSearch) train_lsq(x);
        train_norms(x);
    }

    /// Continues training from the current codebooks on all of x. Residual
    /// codecs rerun each stage's Lloyd iterations from that stage's codebook;
    /// local-search codecs run the EM loop, which never accepts a step that
    /// raises the mean squared error.
    void train_warm(const VectorSet& x) {
        detail::require(is_trained_, ErrorKind::NotTrained, "warm-start training needs codebooks");
        detail::require_dim(x.d, d_, "AdditiveCodec::train_warm");
        if (variant_ == Variant::Residual) train_residual(x, true);
        else train_lsq(x);
        train_norms(x);
    }

    // ---- code-level primitives ----

    using Codes = std::vector<std::uint32_t>;

    Codes unpack(const std::uint8_t* code) const {
        Codes c(m_);
        BitReader r(code);
        for (auto& v : c) v = static_cast<std::uint32_t>(r.read(nbits_));
        return c;
    }

    void reconstruct_codes(const Codes& c, float* out) const {
        std::fill(out, out + d_, 0.0f);
        for (size_t m = 0; m < m_; ++m) {
            const float* e = entry(m, c[m]);
            for (size_t j = 0; j < d_; ++j) out[j] += e[j];
        }
    }

    double reconstruction_error(const float* x, const Codes& c) const {
        std::vector<double> r(x, x + d_);
        for (size_t m = 0; m < m_; ++m) {
            const float* e = entry(m, c[m]);
            for (size_t j = 0; j < d_; ++j) r[j] -= e[j];
        }
        double s = 0.0;
        for (double v : r) s += v * v;
        return s;
    }

    /// Residual beam search keeping `beam` partial codes per stage.
    Codes beam_search(const float* x, size_t beam) const;

    /// ICM sweeps then `ils_iters` perturb-and-sweep rounds from `init`;
    /// a round is kept only if it strictly lowers the error.
    Codes local_search(const float* x, Codes init) const;

    Codes encode_codes(const float* x) const {
        Codes c = beam_search(x, variant_ == Variant::Residual ? beam_size : 1);
        if (variant_ == Variant::LocalSearch) c = local_search(x, std::move(c));
        return c;
    }

    void pack(const Codes& c, std::uint8_t* code) const {
        BitWriter w(code);
        for (auto v : c) w.write(v, nbits_);
        if (norm_mode_ == NormMode::StoredF32 || norm_mode_ == NormMode::StoredQ8) {
            std::vector<float> rec(d_);
            reconstruct_codes(c, rec.data());
            float n2 = squared_norm(rec.data(), d_);
            std::uint8_t* tail = code + index_code_size();
            if (norm_mode_ == NormMode::StoredF32) {
                std::memcpy(tail, &n2, 4);
            } else {
                *tail = quantize_norm(n2);
            }
        }
    }

    void encode_one(const float* x, std::uint8_t* code) const override { pack(encode_codes(x), code); }

    void decode_one(const std::uint8_t* code, float* x) const override { reconstruct_codes(unpack(code), x); }

    /// ||decode(code)||^2 as available under the norm mode.
    float code_norm(const std::uint8_t* code) const {
        switch (norm_mode_) {
            case NormMode::StoredF32: {
                float n;
                std::memcpy(&n, code + index_code_size(), 4);
                return n;
            }
            case NormMode::StoredQ8: return dequantize_norm(code[index_code_size()]);
            case NormMode::FromLUT: return norm_from_lut(unpack(code));
            case NormMode::None: break;
        }
        throw Error(ErrorKind::Unsupported, "additive codec stores no norms (norm mode none)");
    }

    /// sum_m ||T_m[c_m]||^2 + 2 sum_{i<j} <T_i[c_i], T_j[c_j]> from the
    /// precomputed tables.
    float norm_from_lut(const Codes& c) const {
        const CrossTable& t = cross();
        double s = 0.0;
        for (size_t i = 0; i < m_; ++i) {
            s += t.norms[i * k() + c[i]];
            for (size_t j = i + 1; j < m_; ++j) s += 2.0 * t.dot(i, c[i], j, c[j]);
        }
        return static_cast<float>(s);
    }

    /// lut[m*K + j] = <T_m[j], q>
    void ip_lut(const float* q, float* lut) const {
        for (size_t m = 0; m < m_; ++m) {
            for (size_t j = 0; j < k(); ++j) lut[m * k() + j] = inner_product(q, entry(m, j), d_);
        }
    }

    float lut_sum(const float* lut, const std::uint8_t* code) const {
        float s = 0.0f;
        if (nbits_ == 8) {
            for (size_t m = 0; m < m_; ++m) s += lut[m * 256 + code[m]];
            return s;
        }
        BitReader r(code);
        for (size_t m = 0; m < m_; ++m) s += lut[m * k() + r.read(nbits_)];
        return s;
    }

    std::unique_ptr<CodeDistance> distance_computer(Metric metric) const override;

    void write(ByteWriter& w) const override {
        w.section("AQNT", [&](ByteWriter& s) { write_fields(s); });
    }

    void write_fields(ByteWriter& s) const {
        s.put<std::uint64_t>(d_);
        s.put<std::uint64_t>(m_);
        s.put<std::uint32_t>(nbits_);
        s.put<std::uint8_t>(static_cast<std::uint8_t>(variant_));
        s.put<std::uint8_t>(static_cast<std::uint8_t>(norm_mode_));
        s.put<std::uint64_t>(beam_size);
        s.put<std::uint8_t>(use_beam_lut ? 1 : 0);
        s.put<std::uint64_t>(ils_iters);
        s.put<std::uint64_t>(icm_iters);
        s.put<std::uint64_t>(em_iters);
        s.put<std::uint64_t>(encode_seed);
        s.put<std::uint8_t>(is_trained_ ? 1 : 0);
        s.put_vector(codebooks_);
        s.put<float>(norm_min_);
        s.put<float>(norm_max_);
    }

    static std::unique_ptr<AdditiveCodec> read_body(ByteReader& r) {
        auto d = r.get<std::uint64_t>();
        auto m = r.get<std::uint64_t>();
        auto nbits = r.get<std::uint32_t>();
        auto variant = r.get<std::uint8_t>();
        auto norm = r.get<std::uint8_t>();
        if (variant > 1 || norm > 3) throw Error(ErrorKind::Format, "bad additive codec mode");
        auto c = std::make_unique<AdditiveCodec>(d, m, nbits, static_cast<Variant>(variant),
                                                 static_cast<NormMode>(norm));
        c->beam_size = r.get<std::uint64_t>();
        c->use_beam_lut = r.get<std::uint8_t>() != 0;
        c->ils_iters = r.get<std::uint64_t>();
        c->icm_iters = r.get<std::uint64_t>();
        c->em_iters = r.get<std::uint64_t>();
        c->encode_seed = r.get<std::uint64_t>();
        bool trained = r.get<std::uint8_t>() != 0;
        auto cb = r.get_vector<float>();
        float lo = r.get<float>();
        float hi = r.get<float>();
        if (trained) c->set_codebooks(std::move(cb));
        c->set_norm_range(lo, hi);
        return c;
    }

    std::string type_name() const override { return "AdditiveCodec"; }

private:
    struct CrossTable {
        size_t m = 0, k = 0;
        std::vector<double> norms;  // M x K
        std::vector<double> dots;   // pairs i < j, each K x K
        std::vector<size_t> pair_offset;

        double dot(size_t i, size_t a, size_t j, size_t b) const {
            if (i > j) {
                std::swap(i, j);
                std::swap(a, b);
            }
            return dots[pair_offset[i * m + j] + a * k + b];
        }
    };

    const CrossTable& cross() const {
        std::lock_guard lock(cross_mutex_);
        if (!cross_) {
            auto t = std::make_shared<CrossTable>();
            const size_t kk = k();
            t->m = m_;
            t->k = kk;
            t->norms.resize(m_ * kk);
            for (size_t i = 0; i < m_; ++i) {
                for (size_t a = 0; a < kk; ++a) t->norms[i * kk + a] = dot_f64(entry(i, a), entry(i, a));
            }
            t->pair_offset.assign(m_ * m_, 0);
            size_t off = 0;
            for (size_t i = 0; i < m_; ++i) {
                for (size_t j = i + 1; j < m_; ++j) {
                    t->pair_offset[i * m_ + j] = off;
                    off += kk * kk;
                }
            }
            t->dots.resize(off);
            for (size_t i = 0; i < m_; ++i) {
                for (size_t j = i + 1; j < m_; ++j) {
                    double* out = t->dots.data() + t->pair_offset[i * m_ + j];
                    for (size_t a = 0; a < kk; ++a) {
                        for (size_t b = 0; b < kk; ++b) out[a * kk + b] = dot_f64(entry(i, a), entry(j, b));
                    }
                }
            }
            cross_ = std::move(t);
        }
        return *cross_;
    }

    double dot_f64(const float* a, const float* b) const {
        double s = 0.0;
        for (size_t j = 0; j < d_; ++j) s += static_cast<double>(a[j]) * b[j];
        return s;
    }

    std::uint8_t quantize_norm(float n2) const {
        double span = static_cast<double>(norm_max_) - norm_min_;
        if (span <= 0.0) return 0;
        double t = std::floor((n2 - norm_min_) / span * 256.0);
        return static_cast<std::uint8_t>(std::clamp(t, 0.0, 255.0));
    }

    float dequantize_norm(std::uint8_t q) const {
        double span = static_cast<double>(norm_max_) - norm_min_;
        return static_cast<float>(norm_min_ + (q + 0.5) * span / 256.0);
    }

    void train_residual(const VectorSet& x, bool warm);
    void train_lsq(const VectorSet& x);
    void train_norms(const VectorSet& x);

    std::vector<Codes> encode_all(const VectorSet& x) const {
        std::vector<Codes> out(x.n);
        parallel_for(x.n, [&](size_t i) { out[i] = encode_codes(x.ptr(i)); });
        return out;
    }

    double total_error(const VectorSet& x, const std::vector<Codes>& codes) const {
        std::vector<double> e(x.n);
        parallel_for(x.n, [&](size_t i) { e[i] = reconstruction_error(x.ptr(i), codes[i]); });
        double s = 0.0;
        for (double v : e) s += v;
        return s;
    }

    size_t m_;
    unsigned nbits_;
    Variant variant_;
    NormMode norm_mode_;
    std::vector<float> codebooks_;
    float norm_min_ = 0.0f;
    float norm_max_ = 0.0f;
    mutable std::mutex cross_mutex_;
    mutable std::shared_ptr<CrossTable> cross_;
};

inline AdditiveCodec::Codes AdditiveCodec::beam_search(const float* x, size_t beam) const {
    detail::require_arg(beam >= 1, "beam size must be >= 1");
    const size_t kk = k();
    struct Entry {
        Codes codes;
        std::vector<double> residual;  // direct path only
        double err;
    };
    std::vector<Entry> cur(1);
    cur[0].err = 0.0;
    for (size_t j = 0; j < d_; ++j) cur[0].err += static_cast<double>(x[j]) * x[j];
    const CrossTable* table = use_beam_lut ? &cross() : nullptr;
    if (!table) cur[0].residual.assign(x, x + d_);
    std::vector<double> xdot;
    if (table) {
        // <x, T_m[j]> for every entry.
        xdot.resize(m_ * kk);
        for (size_t m = 0; m < m_; ++m) {
            for (size_t j = 0; j < kk; ++j) {
                double s = 0.0;
                const float* e = entry(m, j);
                for (size_t t = 0; t < d_; ++t) s += static_cast<double>(x[t]) * e[t];
                xdot[m * kk + j] = s;
            }
        }
    }

    struct Cand {
        double err;
        size_t parent;
        std::uint32_t j;
    };
    std::vector<Cand> cands;
    for (size_t m = 0; m < m_; ++m) {
        cands.clear();
        for (size_t p = 0; p < cur.size(); ++p) {
            for (size_t j = 0; j < kk; ++j) {
                double e;
                if (table) {
                    // ||r - T||^2 = ||r||^2 + ||T||^2 - 2<x, T> + 2 sum_{i<m} <T_i[c_i], T>
                    double cross_sum = 0.0;
                    for (size_t i = 0; i < m; ++i) cross_sum += table->dot(i, cur[p].codes[i], m, j);
                    e = cur[p].err + table->norms[m * kk + j] - 2.0 * xdot[m * kk + j] + 2.0 * cross_sum;
                } else {
                    const float* t = entry(m, j);
                    const double* r = cur[p].residual.data();
                    e = 0.0;
                    for (size_t q = 0; q < d_; ++q) {
                        double v = r[q] - t[q];
                        e += v * v;
                    }
                }
                cands.push_back({e, p, static_cast<std::uint32_t>(j)});
            }
        }
        auto better = [&](const Cand& a, const Cand& b) {
            if (a.err != b.err) return a.err < b.err;
            const Codes& ca = cur[a.parent].codes;
            const Codes& cb = cur[b.parent].codes;
            if (ca != cb) return std::lexicographical_compare(ca.begin(), ca.end(), cb.begin(), cb.end());
            return a.j < b.j;
        };
        size_t keep = std::min(beam, cands.size());
        std::partial_sort(cands.begin(), cands.begin() + keep, cands.end(), better);
        std::vector<Entry> next(keep);
        for (size_t b = 0; b < keep; ++b) {
            const Entry& par = cur[cands[b].parent];
            next[b].codes = par.codes;
            next[b].codes.push_back(cands[b].j);
            next[b].err = cands[b].err;
            if (!table) {
                next[b].residual = par.residual;
                const float* t = entry(m, cands[b].j);
                for (size_t q = 0; q < d_; ++q) next[b].residual[q] -= t[q];
            }
        }
        cur = std::move(next);
    }
    return cur.front().codes;
}

inline AdditiveCodec::Codes AdditiveCodec::local_search(const float* x, Codes codes) const {
    const size_t kk = k();
    std::vector<double> partial(d_);
    auto icm = [&](Codes& c) {
        for (size_t sweep = 0; sweep < icm_iters; ++sweep) {
            bool changed = false;
            for (size_t m = 0; m < m_; ++m) {
                // Residual with codebook m left out.
                for (size_t j = 0; j < d_; ++j) partial[j] = x[j];
                for (size_t i = 0; i < m_; ++i) {
                    if (i == m) continue;
                    const float* e = entry(i, c[i]);
                    for (size_t j = 0; j < d_; ++j) partial[j] -= e[j];
                }
                auto err_of = [&](size_t cand) {
                    const float* e = entry(m, cand);
                    double s = 0.0;
                    for (size_t j = 0; j < d_; ++j) {
                        double v = partial[j] - e[j];
                        s += v * v;
                    }
                    return s;
                };
                size_t best = c[m];
                double best_err = err_of(best);
                for (size_t cand = 0; cand < kk; ++cand) {
                    double e = err_of(cand);
                    if (e < best_err) {
                        best_err = e;
                        best = cand;
                    }
                }
                if (best != c[m]) {
                    c[m] = static_cast<std::uint32_t>(best);
                    changed = true;
                }
            }
            if (!changed) break;
        }
    };

    icm(codes);
    double best_err = reconstruction_error(x, codes);
    if (ils_iters == 0 || m_ == 0) return codes;

    // The generator depends only on the vector contents, so codes do not
    // depend on batch order or thread count.
    std::uint64_t h = 1469598103934665603ULL;
    const auto* bytes = reinterpret_cast<const std::uint8_t*>(x);
    for (size_t i = 0; i < d_ * sizeof(float); ++i) h = (h ^ bytes[i]) * 1099511628211ULL;
    Rng rng(mix_seed(encode_seed, h));
    std::uniform_int_distribution<size_t> pick_m(0, m_ - 1);
    std::uniform_int_distribution<std::uint32_t> pick_j(0, static_cast<std::uint32_t>(kk - 1));
    for (size_t it = 0; it < ils_iters; ++it) {
        Codes trial = codes;
        trial[pick_m(rng)] = pick_j(rng);
        icm(trial);
        double e = reconstruction_error(x, trial);
        if (e < best_err) {
            best_err = e;
            codes = std::move(trial);
        }
    }
    return codes;
}

inline void AdditiveCodec::train_residual(const VectorSet& x, bool warm) {
    const size_t kk = k();
    std::vector<float> cb = warm ? codebooks_ : std::vector<float>(m_ * kk * d_);
    VectorSet residual = x;
    for (size_t m = 0; m < m_; ++m) {
        KMeansParams p = kmeans;
        p.seed = mix_seed(kmeans.seed, m);
        VectorSet init;
        if (warm) {
            p.max_points_per_centroid = 0;
            init = VectorSet(kk, d_, std::vector<float>(cb.begin() + m * kk * d_, cb.begin() + (m + 1) * kk * d_));
        }
        auto res = kmeans_train(residual, kk, p, warm ? &init : nullptr);
        std::copy(res.centroids.data.begin(), res.centroids.data.end(), cb.begin() + m * kk * d_);
        auto assign = detail::nearest_centroids(residual, res.centroids);
        for (size_t i = 0; i < residual.n; ++i) {
            const float* c = res.centroids.ptr(assign[i]);
            for (size_t j = 0; j < d_; ++j) residual.ptr(i)[j] -= c[j];
        }
    }
    set_codebooks(std::move(cb));
}

inline void AdditiveCodec::train_lsq(const VectorSet& x) {
    const size_t kk = k();
    const size_t mk = m_ * kk;
    auto codes = encode_all(x);
    double err = total_error(x, codes);
    for (size_t it = 0; it < em_iters; ++it) {
        // Least-squares codebook update: (B^T B + lambda I) C = B^T X, where
        // B is the n x MK one-hot code matrix.
        Eigen::MatrixXd btb = Eigen::MatrixXd::Zero(mk, mk);
        Eigen::MatrixXd btx = Eigen::MatrixXd::Zero(mk, d_);
        for (size_t i = 0; i < x.n; ++i) {
            for (size_t a = 0; a < m_; ++a) {
                size_t ra = a * kk + codes[i][a];
                for (size_t b = 0; b < m_; ++b) btb(ra, b * kk + codes[i][b]) += 1.0;
                for (size_t j = 0; j < d_; ++j) btx(ra, j) += x.ptr(i)[j];
            }
        }
        double ridge = 1e-6 * std::max(1.0, btb.diagonal().maxCoeff());
        btb.diagonal().array() += ridge;
        Eigen::MatrixXd c = btb.ldlt().solve(btx);
        std::vector<float> old = codebooks_;
        std::vector<float> fresh(mk * d_);
        for (size_t r = 0; r < mk; ++r) {
            // Entries never used keep their previous value.
            bool used = btb(r, r) > 0.5 + ridge;
            for (size_t j = 0; j < d_; ++j) fresh[r * d_ + j] = used ? static_cast<float>(c(r, j)) : old[r * d_ + j];
        }
        set_codebooks(std::move(fresh));
        auto next_codes = encode_all(x);
        double next_err = total_error(x, next_codes);
        if (!(next_err < err)) {
            set_codebooks(std::move(old));
            break;
        }
        codes = std::move(next_codes);
        err = next_err;
    }
}

inline void AdditiveCodec::train_norms(const VectorSet& x) {
    if (norm_mode_ != NormMode::StoredQ8) return;
    auto codes = encode_all(x);
    float lo = std::numeric_limits<float>::infinity();
    float hi = -std::numeric_limits<float>::infinity();
    std::vector<float> rec(d_);
    for (const auto& c : codes) {
        reconstruct_codes(c, rec.data());
        float n2 = squared_norm(rec.data(), d_);
        lo = std::min(lo, n2);
        hi = std::max(hi, n2);
    }
    set_norm_range(lo, hi);
}

namespace detail {

class AdditiveLutDistance : public CodeDistance {
public:
    AdditiveLutDistance(const AdditiveCodec& aq, bool l2) : aq_(aq), l2_(l2), lut_(aq.m() * aq.k()) {}
    void set_query(const float* q) override {
        aq_.ip_lut(q, lut_.data());
        if (l2_) qnorm_ = squared_norm(q, aq_.d());
    }
    float operator()(const std::uint8_t* code) override {
        float ip = aq_.lut_sum(lut_.data(), code);
        if (!l2_) return ip;
        return qnorm_ + aq_.code_norm(code) - 2.0f * ip;
    }

private:
    const AdditiveCodec& aq_;
    bool l2_;
    std::vector<float> lut_;
    float qnorm_ = 0.0f;
};

} // namespace detail

inline std::unique_ptr<CodeDistance> AdditiveCodec::distance_computer(Metric metric) const {
    if (metric.kind == MetricKind::InnerProduct) return std::make_unique<detail::AdditiveLutDistance>(*this, false);
    if (metric.kind == MetricKind::L2 && norm_mode_ != NormMode::None) {
        return std::make_unique<detail::AdditiveLutDistance>(*this, true);
    }
    return Codec::distance_computer(metric);
}

inline std::unique_ptr<AdditiveCodec> AdditiveCodec::from_product(const ProductCodec& pq, Variant variant,
                                                                  NormMode norm_mode) {
    detail::require(pq.is_trained(), ErrorKind::NotTrained, "product codec is not trained");
    auto aq = std::make_unique<AdditiveCodec>(pq.d(), pq.m(), pq.nbits(), variant, norm_mode);
    const size_t kk = pq.ksub(), d = pq.d(), ds = pq.dsub();
    std::vector<float> cb(pq.m() * kk * d, 0.0f);
    for (size_t m = 0; m < pq.m(); ++m) {
        for (size_t j = 0; j < kk; ++j) std::copy(pq.entry(m, j), pq.entry(m, j) + ds, cb.begin() + (m * kk + j) * d + m * ds);
    }
    aq->set_codebooks(std::move(cb));
    return aq;
}

} // namespace vx
