#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include "vx/core/error.hpp"

namespace vx {

enum class MetricKind : std::uint8_t {
    InnerProduct = 0,
    L2 = 1,
    L1 = 2,
    Linf = 3,
    Lp = 4,
    Canberra = 5,
    BrayCurtis = 6,
    JensenShannon = 7,
    Jaccard = 8,
    NaNEuclidean = 9,
};

inline constexpr std::array<MetricKind, 10> kAllMetricKinds = {
    MetricKind::InnerProduct, MetricKind::L2,        MetricKind::L1,
    MetricKind::Linf,         MetricKind::Lp,        MetricKind::Canberra,
    MetricKind::BrayCurtis,   MetricKind::JensenShannon, MetricKind::Jaccard,
    MetricKind::NaNEuclidean,
};

/// A metric kind plus its argument (the exponent of Lp). L2 is the squared
/// Euclidean distance.
struct Metric {
    MetricKind kind = MetricKind::L2;
    float arg = 0.0f;

    constexpr Metric() = default;
    constexpr Metric(MetricKind k, float a = 0.0f) : kind(k), arg(a) {}

    static constexpr Metric l2() { return Metric(MetricKind::L2); }
    static constexpr Metric inner_product() { return Metric(MetricKind::InnerProduct); }
    static Metric lp(float p) {
        detail::require_arg(p > 0.0f, "Lp metric requires p > 0");
        return Metric(MetricKind::Lp, p);
    }

    /// Similarities rank larger values first. The inner product and the
    /// Jaccard ratio (sum of minima over sum of maxima) are similarities.
    constexpr bool higher_is_better() const {
        return kind == MetricKind::InnerProduct || kind == MetricKind::Jaccard;
    }

    /// Worst possible value, used to pad missing result slots.
    constexpr float worst_value() const {
        return higher_is_better() ? -std::numeric_limits<float>::infinity()
                                  : std::numeric_limits<float>::infinity();
    }

    void validate() const {
        if (kind == MetricKind::Lp) {
            detail::require_arg(arg > 0.0f, "Lp metric requires p > 0");
        }
    }

    friend constexpr bool operator==(const Metric&, const Metric&) = default;
};

inline std::string_view metric_name(MetricKind k) {
    switch (k) {
        case MetricKind::InnerProduct: return "IP";
        case MetricKind::L2: return "L2";
        case MetricKind::L1: return "L1";
        case MetricKind::Linf: return "Linf";
        case MetricKind::Lp: return "Lp";
        case MetricKind::Canberra: return "Canberra";
        case MetricKind::BrayCurtis: return "BrayCurtis";
        case MetricKind::JensenShannon: return "JensenShannon";
        case MetricKind::Jaccard: return "Jaccard";
        case MetricKind::NaNEuclidean: return "NaNEuclidean";
    }
    return "?";
}

inline std::optional<MetricKind> parse_metric_kind(std::string_view s) {
    for (MetricKind k : kAllMetricKinds) {
        if (metric_name(k) == s) return k;
    }
    if (s == "l2") return MetricKind::L2;
    if (s == "ip") return MetricKind::InnerProduct;
    return std::nullopt;
}

} // namespace vx
