#pragma once

#include <vector>

#include "vx/quantize/additive.hpp"
#include "vx/quantize/product.hpp"
#include "vx/quantize/product_additive.hpp"

namespace vx {

/// Inner-product lookup tables of a query: one row of K entries per
/// codebook, so that <q, decode(c)> = sum_m lut[m][c_m].
inline std::vector<float> adc_lookup_tables(const Codec& codec, std::span<const float> q) {
    detail::require(codec.is_trained(), ErrorKind::NotTrained, "codec is not trained");
    detail::require_dim(q.size(), codec.d(), "adc_lookup_tables");
    if (const auto* pq = dynamic_cast<const ProductCodec*>(&codec)) {
        std::vector<float> lut(pq->m() * pq->ksub());
        pq->ip_lut(q.data(), lut.data());
        return lut;
    }
    if (const auto* aq = dynamic_cast<const AdditiveCodec*>(&codec)) {
        std::vector<float> lut(aq->m() * aq->k());
        aq->ip_lut(q.data(), lut.data());
        return lut;
    }
    if (const auto* prq = dynamic_cast<const ProductAdditiveCodec*>(&codec)) {
        std::vector<float> lut(prq->lut_size());
        prq->ip_lut(q.data(), lut.data());
        return lut;
    }
    throw Error(ErrorKind::Unsupported, codec.type_name() + " has no lookup-table inner products");
}

/// ||q - decode(code)||^2 = ||q||^2 + ||x'||^2 - 2 <q, x'> with the norm
/// taken from the code (stored modes) or the codebook cross products.
inline float compressed_l2(const AdditiveCodec& codec, std::span<const float> q, const std::uint8_t* code) {
    detail::require(codec.norm_mode() != AdditiveCodec::NormMode::None, ErrorKind::Unsupported,
                    "compressed L2 needs a norm mode other than none");
    auto lut = adc_lookup_tables(codec, q);
    float ip = codec.lut_sum(lut.data(), code);
    return squared_norm(q.data(), q.size()) + codec.code_norm(code) - 2.0f * ip;
}

} // namespace vx
