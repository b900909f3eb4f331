#pragma once

#include <memory>

#include "vx/quantize/additive.hpp"
#include "vx/quantize/codec.hpp"
#include "vx/quantize/kmeans.hpp"
#include "vx/quantize/product.hpp"
#include "vx/quantize/product_additive.hpp"
#include "vx/quantize/scalar.hpp"

namespace vx {

/// Reads one codec section written by Codec::write.
inline std::unique_ptr<Codec> read_codec(ByteReader& r) {
    auto [tag, body] = r.any_section();
    if (tag == "RAWC") return std::make_unique<RawCodec>(body.get<std::uint64_t>());
    if (tag == "KMNS") return KMeansCodec::read_body(body);
    if (tag == "SQNT") return ScalarCodec::read_body(body);
    if (tag == "PQNT") return ProductCodec::read_body(body);
    if (tag == "AQNT") return AdditiveCodec::read_body(body);
    if (tag == "PAQN") return ProductAdditiveCodec::read_body(body);
    throw Error(ErrorKind::Format, "unknown codec section '" + tag + "'");
}

} // namespace vx
