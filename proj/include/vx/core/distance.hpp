#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <type_traits>

#include <Eigen/Core>

#include "vx/core/error.hpp"
#include "vx/core/metric.hpp"

namespace vx {

namespace detail {

inline Eigen::Map<const Eigen::ArrayXf> arr(const float* x, size_t d) {
    return {x, static_cast<Eigen::Index>(d)};
}

} // namespace detail

inline float inner_product(const float* x, const float* y, size_t d) {
    return (detail::arr(x, d) * detail::arr(y, d)).sum();
}

inline float l2_sqr(const float* x, const float* y, size_t d) {
    return (detail::arr(x, d) - detail::arr(y, d)).square().sum();
}

inline float squared_norm(const float* x, size_t d) {
    return detail::arr(x, d).square().sum();
}

/// Distance kernel for one metric kind, no argument validation.
template <MetricKind K>
inline float distance_kernel(const float* x, const float* y, size_t d, float arg) {
    if constexpr (K == MetricKind::InnerProduct) {
        return inner_product(x, y, d);
    } else if constexpr (K == MetricKind::L2) {
        return l2_sqr(x, y, d);
    } else if constexpr (K == MetricKind::L1) {
        return (detail::arr(x, d) - detail::arr(y, d)).abs().sum();
    } else if constexpr (K == MetricKind::Linf) {
        auto a = detail::arr(x, d), b = detail::arr(y, d);
        return d ? (a - b).abs().maxCoeff() : 0.0f;
    } else if constexpr (K == MetricKind::Lp) {
        // t^p as t * exp((p-1) log t) with packet log/exp; the leading factor
        // keeps t = 0 exactly zero where exp alone would underflow to a denormal.
        // Small integer exponents take exact repeated products instead.
        if (arg == 2.0f) return l2_sqr(x, y, d);
        if (arg == 3.0f) return (detail::arr(x, d) - detail::arr(y, d)).abs().cube().sum();
        if (arg == 4.0f) return (detail::arr(x, d) - detail::arr(y, d)).square().square().sum();
        auto a = detail::arr(x, d), b = detail::arr(y, d);
        auto t = (a - b).abs();
        return (t * ((arg - 1.0f) * t.log()).exp()).sum();
    } else if constexpr (K == MetricKind::Canberra) {
        // A zero denominator forces a zero numerator, so clamping gives 0/0 = 0.
        auto a = detail::arr(x, d), b = detail::arr(y, d);
        return ((a - b).abs() / (a.abs() + b.abs()).max(std::numeric_limits<float>::min())).sum();
    } else if constexpr (K == MetricKind::BrayCurtis) {
        auto a = detail::arr(x, d), b = detail::arr(y, d);
        float num = (a - b).abs().sum();
        float den = (a + b).abs().sum();
        return den > 0.0f ? num / den : 0.0f;
    } else if constexpr (K == MetricKind::JensenShannon) {
        // 0.5 * (KL(x||m) + KL(y||m)), m = (x + y) / 2, with 0 log 0 = 0.
        // Clamping to the smallest normal float makes 0 log 0 evaluate to 0
        // without a per-lane branch, so the packet log vectorizes.
        constexpr float tiny = std::numeric_limits<float>::min();
        auto a = detail::arr(x, d), b = detail::arr(y, d);
        auto m = (0.5f * (a + b)).max(tiny);
        float kl_x = (a * (a.max(tiny) / m).log()).sum();
        float kl_y = (b * (b.max(tiny) / m).log()).sum();
        return 0.5f * (kl_x + kl_y);
    } else if constexpr (K == MetricKind::Jaccard) {
        auto a = detail::arr(x, d), b = detail::arr(y, d);
        float mins = a.min(b).sum();
        float maxs = a.max(b).sum();
        return maxs != 0.0f ? mins / maxs : 0.0f;
    } else if constexpr (K == MetricKind::NaNEuclidean) {
        // |V|/d * sum over V of squared differences, V = components present in both.
        // Fast path: with nothing missing the weight is 1 and this is plain L2.
        float full = l2_sqr(x, y, d);
        if (full == full) return full;
        float s = 0.0f, present = 0.0f;
        for (size_t i = 0; i < d; ++i) {
            if (x[i] == x[i] && y[i] == y[i]) {
                float t = x[i] - y[i];
                s += t * t;
                present += 1.0f;
            }
        }
        if (present == 0.0f) return std::numeric_limits<float>::quiet_NaN();
        return present / static_cast<float>(d) * s;
    }
}

/// Calls `f(std::integral_constant<MetricKind, K>{})` for the runtime kind so
/// inner loops are instantiated once per metric.
template <class F>
inline decltype(auto) dispatch_metric(MetricKind kind, F&& f) {
    using enum MetricKind;
    switch (kind) {
        case InnerProduct: return f(std::integral_constant<MetricKind, InnerProduct>{});
        case L2: return f(std::integral_constant<MetricKind, L2>{});
        case L1: return f(std::integral_constant<MetricKind, L1>{});
        case Linf: return f(std::integral_constant<MetricKind, Linf>{});
        case Lp: return f(std::integral_constant<MetricKind, Lp>{});
        case Canberra: return f(std::integral_constant<MetricKind, Canberra>{});
        case BrayCurtis: return f(std::integral_constant<MetricKind, BrayCurtis>{});
        case JensenShannon: return f(std::integral_constant<MetricKind, JensenShannon>{});
        case Jaccard: return f(std::integral_constant<MetricKind, Jaccard>{});
        case NaNEuclidean: return f(std::integral_constant<MetricKind, NaNEuclidean>{});
    }
    throw Error(ErrorKind::InvalidArgument, "unknown metric kind");
}

inline float distance_unchecked(const float* x, const float* y, size_t d, Metric m) {
    return dispatch_metric(m.kind, [&](auto k) {
        return distance_kernel<decltype(k)::value>(x, y, d, m.arg);
    });
}

/// Distance between two vectors under `m`, exactly as the metric defines it.
inline float pairwise_distance(std::span<const float> x, std::span<const float> y, Metric m) {
    detail::require_dim(y.size(), x.size(), "pairwise_distance");
    m.validate();
    return distance_unchecked(x.data(), y.data(), x.size(), m);
}

} // namespace vx
