#pragma once

#include <memory>
#include <vector>

#include "vx/quantize/additive.hpp"
#include "vx/quantize/product.hpp"

namespace vx {

/// S additive codecs over consecutive d/S-dimensional sub-vectors; the code
/// is the concatenation of the sub-codes.
class ProductAdditiveCodec : public Codec {
public:
    using Variant = AdditiveCodec::Variant;
    using NormMode = AdditiveCodec::NormMode;

    /// Sub-codecs derive their norms from lookup tables so codes carry no
    /// per-sub-vector norm field.
    ProductAdditiveCodec(size_t d, size_t s, size_t m, unsigned nbits, Variant variant = Variant::Residual,
                         NormMode sub_norm = NormMode::FromLUT)
        : Codec(d), s_(s) {
        detail::require_arg(s >= 1, "product-additive codec requires S >= 1");
        detail::require_arg(d % s == 0, "product-additive codec requires S to divide d (d=" +
                                            std::to_string(d) + ", S=" + std::to_string(s) + ")");
        dsub_ = d / s;
        for (size_t i = 0; i < s; ++i) {
            subs_.push_back(std::make_unique<AdditiveCodec>(dsub_, m, nbits, variant, sub_norm));
            subs_.back()->kmeans.seed = mix_seed(subs_.back()->kmeans.seed, i);
        }
    }

    /// S = M_pq sub-codecs with one codebook each, equal to the product
    /// codec's sub-codebooks.
    static std::unique_ptr<ProductAdditiveCodec> from_product(const ProductCodec& pq, Variant variant) {
        detail::require(pq.is_trained(), ErrorKind::NotTrained, "product codec is not trained");
        auto prq = std::make_unique<ProductAdditiveCodec>(pq.d(), pq.m(), 1, pq.nbits(), variant);
        for (size_t s = 0; s < pq.m(); ++s) {
            const float* e = pq.entry(s, 0);
            prq->subs_[s]->set_codebooks(std::vector<float>(e, e + pq.ksub() * pq.dsub()));
        }
        prq->is_trained_ = true;
        return prq;
    }

    size_t s() const { return s_; }
    size_t dsub() const { return dsub_; }
    const AdditiveCodec& sub(size_t i) const { return *subs_[i]; }
    AdditiveCodec& sub(size_t i) { return *subs_[i]; }

    size_t code_size() const override {
        size_t cs = 0;
        for (const auto& c : subs_) cs += c->code_size();
        return cs;
    }

    void train(const VectorSet& x) override { train_impl(x, false); }
    void train_warm(const VectorSet& x) { train_impl(x, true); }

    void encode_one(const float* x, std::uint8_t* code) const override {
        for (const auto& c : subs_) {
            c->encode_one(x, code);
            x += dsub_;
            code += c->code_size();
        }
    }

    void decode_one(const std::uint8_t* code, float* x) const override {
        for (const auto& c : subs_) {
            c->decode_one(code, x);
            x += dsub_;
            code += c->code_size();
        }
    }

    /// Sub-codec tables stacked: S*M rows of K entries.
    void ip_lut(const float* q, float* lut) const {
        for (size_t i = 0; i < s_; ++i) {
            subs_[i]->ip_lut(q + i * dsub_, lut);
            lut += subs_[i]->m() * subs_[i]->k();
        }
    }

    size_t lut_size() const { return s_ * subs_[0]->m() * subs_[0]->k(); }

    std::unique_ptr<CodeDistance> distance_computer(Metric metric) const override;

    void write(ByteWriter& w) const override {
        w.section("PAQN", [&](ByteWriter& s) {
            s.put<std::uint64_t>(d_);
            s.put<std::uint64_t>(s_);
            s.put<std::uint8_t>(is_trained_ ? 1 : 0);
            for (const auto& c : subs_) c->write(s);
        });
    }

    static std::unique_ptr<ProductAdditiveCodec> read_body(ByteReader& r) {
        auto d = r.get<std::uint64_t>();
        auto s = r.get<std::uint64_t>();
        bool trained = r.get<std::uint8_t>() != 0;
        if (s == 0 || s > d) throw Error(ErrorKind::Format, "bad product-additive split");
        std::vector<std::unique_ptr<AdditiveCodec>> subs;
        for (std::uint64_t i = 0; i < s; ++i) {
            ByteReader body = r.section("AQNT");
            subs.push_back(AdditiveCodec::read_body(body));
        }
        auto c = std::make_unique<ProductAdditiveCodec>(d, s, subs[0]->m(), subs[0]->nbits(), subs[0]->variant(),
                                                        subs[0]->norm_mode());
        for (auto& sub : subs) {
            if (sub->d() != d / s) throw Error(ErrorKind::Format, "product-additive sub-codec dimension mismatch");
        }
        c->subs_ = std::move(subs);
        c->is_trained_ = trained;
        return c;
    }

    std::string type_name() const override { return "ProductAdditiveCodec"; }

private:
    void train_impl(const VectorSet& x, bool warm) {
        detail::require_dim(x.d, d_, "ProductAdditiveCodec::train");
        for (size_t i = 0; i < s_; ++i) {
            VectorSet sub(x.n, dsub_);
            for (size_t r = 0; r < x.n; ++r) std::copy(x.ptr(r) + i * dsub_, x.ptr(r) + (i + 1) * dsub_, sub.ptr(r));
            if (warm) subs_[i]->train_warm(sub);
            else subs_[i]->train(sub);
        }
        is_trained_ = true;
    }

    size_t s_;
    size_t dsub_;
    std::vector<std::unique_ptr<AdditiveCodec>> subs_;
};

namespace detail {

class ProductAdditiveDistance : public CodeDistance {
public:
    ProductAdditiveDistance(const ProductAdditiveCodec& prq, Metric metric) : prq_(prq) {
        for (size_t i = 0; i < prq.s(); ++i) parts_.push_back(prq.sub(i).distance_computer(metric));
    }
    void set_query(const float* q) override {
        for (size_t i = 0; i < parts_.size(); ++i) parts_[i]->set_query(q + i * prq_.dsub());
    }
    float operator()(const std::uint8_t* code) override {
        float s = 0.0f;
        for (size_t i = 0; i < parts_.size(); ++i) {
            s += (*parts_[i])(code);
            code += prq_.sub(i).code_size();
        }
        return s;
    }

private:
    const ProductAdditiveCodec& prq_;
    std::vector<std::unique_ptr<CodeDistance>> parts_;
};

} // namespace detail

inline std::unique_ptr<CodeDistance> ProductAdditiveCodec::distance_computer(Metric metric) const {
    if (metric.kind == MetricKind::L2 || metric.kind == MetricKind::InnerProduct) {
        return std::make_unique<detail::ProductAdditiveDistance>(*this, metric);
    }
    return Codec::distance_computer(metric);
}

inline std::unique_ptr<AdditiveCodec> AdditiveCodec::from_product_additive(const ProductAdditiveCodec& prq,
                                                                           Variant variant, NormMode norm_mode) {
    detail::require(prq.is_trained(), ErrorKind::NotTrained, "product-additive codec is not trained");
    const AdditiveCodec& first = prq.sub(0);
    const size_t msub = first.m(), kk = first.k(), d = prq.d(), ds = prq.dsub();
    auto aq = std::make_unique<AdditiveCodec>(d, prq.s() * msub, first.nbits(), variant, norm_mode);
    std::vector<float> cb(prq.s() * msub * kk * d, 0.0f);
    for (size_t s = 0; s < prq.s(); ++s) {
        for (size_t t = 0; t < msub; ++t) {
            size_t m = s * msub + t;
            for (size_t j = 0; j < kk; ++j) {
                const float* e = prq.sub(s).entry(t, j);
                std::copy(e, e + ds, cb.begin() + (m * kk + j) * d + s * ds);
            }
        }
    }
    aq->set_codebooks(std::move(cb));
    return aq;
}

} // namespace vx
