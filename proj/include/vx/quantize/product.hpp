#pragma once

#include <vector>

#include "vx/quantize/bits.hpp"
#include "vx/quantize/codec.hpp"
#include "vx/quantize/kmeans.hpp"
#include "vx/quantize/scalar.hpp"

namespace vx {

/// M independent k-means quantizers over consecutive d/M-dimensional
/// sub-vectors, with K = 2^nbits entries each.
class ProductCodec : public Codec {
public:
    KMeansParams kmeans;

    ProductCodec(size_t d, size_t m, unsigned nbits) : Codec(d), m_(m), nbits_(nbits) {
        detail::require_arg(m >= 1, "product codec requires M >= 1");
        detail::require_arg(d % m == 0, "product codec requires M to divide d (d=" +
                                            std::to_string(d) + ", M=" + std::to_string(m) + ")");
        detail::require_arg(nbits >= 1 && nbits <= 16, "product codec supports 1..16 bits per sub-code");
        dsub_ = d / m;
    }

    /// PQ with one-dimensional sub-spaces whose codebooks are the scalar
    /// codec's reproduction values, so both encode identically.
    static std::unique_ptr<ProductCodec> from_scalar(const ScalarCodec& sq) {
        detail::require(sq.is_trained(), ErrorKind::NotTrained, "scalar codec is not trained");
        auto pq = std::make_unique<ProductCodec>(sq.d(), sq.d(), sq.bits());
        std::vector<float> cb(sq.d() * sq.levels());
        for (size_t m = 0; m < sq.d(); ++m) {
            for (size_t j = 0; j < sq.levels(); ++j) {
                cb[m * sq.levels() + j] = sq.reproduction_value(m, static_cast<std::uint32_t>(j));
            }
        }
        pq->set_codebooks(std::move(cb));
        return pq;
    }

    size_t m() const { return m_; }
    size_t ksub() const { return size_t{1} << nbits_; }
    unsigned nbits() const { return nbits_; }
    size_t dsub() const { return dsub_; }
    size_t code_size() const override { return bytes_for_bits(m_ * nbits_); }

    std::span<const float> codebooks() const { return codebooks_; }
    const float* entry(size_t m, size_t j) const { return codebooks_.data() + (m * ksub() + j) * dsub_; }

    void set_codebooks(std::vector<float> cb) {
        detail::require_arg(cb.size() == m_ * ksub() * dsub_, "codebooks must be M x K x d/M");
        codebooks_ = std::move(cb);
        is_trained_ = true;
    }

    void train(const VectorSet& x) override { train_impl(x, false); }

    /// Continues Lloyd iterations from the current codebooks on all of x.
    void train_warm(const VectorSet& x) {
        detail::require(is_trained_, ErrorKind::NotTrained, "warm-start training needs codebooks");
        train_impl(x, true);
    }

    void encode_one(const float* x, std::uint8_t* code) const override {
        BitWriter w(code);
        const size_t k = ksub();
        for (size_t m = 0; m < m_; ++m) {
            const float* xs = x + m * dsub_;
            size_t best = 0;
            float bd = std::numeric_limits<float>::infinity();
            for (size_t j = 0; j < k; ++j) {
                float dj = l2_sqr(xs, entry(m, j), dsub_);
                if (dj < bd) {
                    bd = dj;
                    best = j;
                }
            }
            w.write(best, nbits_);
        }
    }

    void decode_one(const std::uint8_t* code, float* x) const override {
        BitReader r(code);
        for (size_t m = 0; m < m_; ++m) {
            const float* e = entry(m, r.read(nbits_));
            std::copy(e, e + dsub_, x + m * dsub_);
        }
    }

    /// lut[m*K + j] = <entry(m, j), q_m>
    void ip_lut(const float* q, float* lut) const {
        for (size_t m = 0; m < m_; ++m) {
            for (size_t j = 0; j < ksub(); ++j) lut[m * ksub() + j] = inner_product(q + m * dsub_, entry(m, j), dsub_);
        }
    }

    /// lut[m*K + j] = ||q_m - entry(m, j)||^2
    void l2_lut(const float* q, float* lut) const {
        for (size_t m = 0; m < m_; ++m) {
            for (size_t j = 0; j < ksub(); ++j) lut[m * ksub() + j] = l2_sqr(q + m * dsub_, entry(m, j), dsub_);
        }
    }

    float lut_sum(const float* lut, const std::uint8_t* code) const {
        float s = 0.0f;
        if (nbits_ == 8) {
            for (size_t m = 0; m < m_; ++m) s += lut[m * 256 + code[m]];
            return s;
        }
        BitReader r(code);
        for (size_t m = 0; m < m_; ++m) s += lut[m * ksub() + r.read(nbits_)];
        return s;
    }

    std::unique_ptr<CodeDistance> distance_computer(Metric metric) const override;

    void write(ByteWriter& w) const override {
        w.section("PQNT", [&](ByteWriter& s) {
            s.put<std::uint64_t>(d_);
            s.put<std::uint64_t>(m_);
            s.put<std::uint32_t>(nbits_);
            s.put<std::uint8_t>(is_trained_ ? 1 : 0);
            s.put_vector(codebooks_);
        });
    }

    static std::unique_ptr<ProductCodec> read_body(ByteReader& r) {
        auto d = r.get<std::uint64_t>();
        auto m = r.get<std::uint64_t>();
        auto nbits = r.get<std::uint32_t>();
        bool trained = r.get<std::uint8_t>() != 0;
        auto cb = r.get_vector<float>();
        auto c = std::make_unique<ProductCodec>(d, m, nbits);
        if (trained) c->set_codebooks(std::move(cb));
        return c;
    }

    std::string type_name() const override { return "ProductCodec"; }

private:
    void train_impl(const VectorSet& x, bool warm) {
        detail::require_dim(x.d, d_, "ProductCodec::train");
        const size_t k = ksub();
        detail::require_arg(x.n >= k, "product codec training needs at least K vectors");
        std::vector<float> cb(m_ * k * dsub_);
        for (size_t m = 0; m < m_; ++m) {
            VectorSet sub(x.n, dsub_);
            for (size_t i = 0; i < x.n; ++i) std::copy(x.ptr(i) + m * dsub_, x.ptr(i) + (m + 1) * dsub_, sub.ptr(i));
            KMeansParams p = kmeans;
            p.seed = mix_seed(kmeans.seed, m);
            VectorSet init;
            if (warm) {
                p.max_points_per_centroid = 0;
                init = VectorSet(k, dsub_, std::vector<float>(entry(m, 0), entry(m, 0) + k * dsub_));
            }
            auto res = kmeans_train(sub, k, p, warm ? &init : nullptr);
            std::copy(res.centroids.data.begin(), res.centroids.data.end(), cb.begin() + m * k * dsub_);
        }
        set_codebooks(std::move(cb));
    }

    size_t m_;
    unsigned nbits_;
    size_t dsub_;
    std::vector<float> codebooks_;
};

namespace detail {

class ProductLutDistance : public CodeDistance {
public:
    ProductLutDistance(const ProductCodec& pq, bool l2) : pq_(pq), l2_(l2), lut_(pq.m() * pq.ksub()) {}
    void set_query(const float* q) override {
        if (l2_) pq_.l2_lut(q, lut_.data());
        else pq_.ip_lut(q, lut_.data());
    }
    float operator()(const std::uint8_t* code) override { return pq_.lut_sum(lut_.data(), code); }

private:
    const ProductCodec& pq_;
    bool l2_;
    std::vector<float> lut_;
};

} // namespace detail

inline std::unique_ptr<CodeDistance> ProductCodec::distance_computer(Metric metric) const {
    if (metric.kind == MetricKind::L2 || metric.kind == MetricKind::InnerProduct) {
        return std::make_unique<detail::ProductLutDistance>(*this, metric.kind == MetricKind::L2);
    }
    return Codec::distance_computer(metric);
}

} // namespace vx
