#pragma once

#include "vx/core/metric.hpp"
#include "vx/core/serialize.hpp"

namespace vx::detail {

inline void write_metric(ByteWriter& w, Metric m) {
    w.put<std::uint8_t>(static_cast<std::uint8_t>(m.kind));
    w.put<float>(m.arg);
}

inline Metric read_metric(ByteReader& r) {
    auto k = r.get<std::uint8_t>();
    float arg = r.get<float>();
    if (k > static_cast<std::uint8_t>(MetricKind::NaNEuclidean)) {
        throw Error(ErrorKind::Format, "unknown metric kind " + std::to_string(k));
    }
    return Metric(static_cast<MetricKind>(k), arg);
}

} // namespace vx::detail
