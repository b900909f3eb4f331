#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "vx/core/distance.hpp"
#include "vx/core/error.hpp"
#include "vx/core/types.hpp"

namespace vx {

enum class MapSpace : std::uint8_t { L2 = 0, IP = 1, Cos = 2 };

inline const char* map_space_name(MapSpace s) {
    switch (s) {
        case MapSpace::L2: return "L2";
        case MapSpace::IP: return "IP";
        case MapSpace::Cos: return "cos";
    }
    return "?";
}

/// Cosine similarity; NaN when either vector is zero.
inline float cosine_similarity(const float* x, const float* y, size_t d) {
    double nx = std::sqrt(static_cast<double>(squared_norm(x, d)));
    double ny = std::sqrt(static_cast<double>(squared_norm(y, d)));
    return static_cast<float>(inner_product(x, y, d) / (nx * ny));
}

/// Score of (x, y) in a map space, with the space's own direction
/// (L2 smaller-is-better, IP and cos larger-is-better).
inline float map_space_score(MapSpace s, const float* x, const float* y, size_t d) {
    switch (s) {
        case MapSpace::L2: return l2_sqr(x, y, d);
        case MapSpace::IP: return inner_product(x, y, d);
        case MapSpace::Cos: return cosine_similarity(x, y, d);
    }
    return 0.0f;
}

inline bool map_space_higher_is_better(MapSpace s) { return s != MapSpace::L2; }

/// Preprocessing that lets an index built for `target` answer nearest-neighbor
/// queries for `source`. Queries and database vectors are mapped differently;
/// alpha and beta are fixed by fit() from the database norms.
class MetricMap {
public:
    /// Headroom on the fitted norm bound so moderately larger later additions
    /// stay inside the square-root domain.
    static constexpr double kHeadroom = 1.05;

    MetricMap(MapSpace source, MapSpace target) : source_(source), target_(target) {
        detail::require_arg(source != target, "metric map needs distinct source and target spaces");
    }

    MapSpace source() const { return source_; }
    MapSpace target() const { return target_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    bool is_fitted() const { return fitted_; }

    size_t output_dim(size_t d) const {
        if (source_ == MapSpace::Cos) return d;
        if (source_ == MapSpace::L2 && target_ == MapSpace::Cos) return d + 2;
        return d + 1;
    }

    void fit(const VectorSet& db) {
        detail::require_arg(db.n >= 1, "metric map fit needs at least one database vector");
        double max_norm = 0.0;
        double max_l2cos = 0.0;
        for (size_t i = 0; i < db.n; ++i) {
            double n = std::sqrt(static_cast<double>(squared_norm(db.ptr(i), db.d)));
            max_norm = std::max(max_norm, n);
            if (source_ == MapSpace::Cos) {
                detail::require_arg(n > 0.0, "cosine source requires non-zero database vectors");
            }
        }
        alpha_ = 1.0;
        beta_ = 1.0;
        if (source_ == MapSpace::L2) {
            alpha_ = max_norm > 0.0 ? kHeadroom * max_norm : 1.0;
            if (target_ == MapSpace::Cos) {
                // The last component needs beta^2 (|y|^2 + |y|^4 / alpha^2) <= 1.
                for (size_t i = 0; i < db.n; ++i) {
                    double n2 = squared_norm(db.ptr(i), db.d);
                    max_l2cos = std::max(max_l2cos, std::sqrt(n2 + n2 * n2 / (alpha_ * alpha_)));
                }
                beta_ = max_l2cos > 0.0 ? 1.0 / (kHeadroom * max_l2cos) : 1.0;
            }
        } else if (source_ == MapSpace::IP) {
            detail::require_arg(max_norm > 0.0, "inner-product map requires a non-zero database vector");
            alpha_ = target_ == MapSpace::L2 ? kHeadroom * max_norm : 1.0 / (kHeadroom * max_norm);
        }
        fitted_ = true;
    }

    /// Fixes alpha and beta directly instead of fitting them.
    void set_parameters(double alpha, double beta = 1.0) {
        detail::require_arg(alpha > 0.0 && beta > 0.0, "metric map parameters must be positive");
        alpha_ = alpha;
        beta_ = beta;
        fitted_ = true;
    }

    std::vector<float> apply_query(std::span<const float> x) const {
        require_fitted();
        std::vector<float> out(x.begin(), x.end());
        if (source_ == MapSpace::Cos) {
            normalize(out);
        } else if (source_ == MapSpace::L2) {
            out.push_back(static_cast<float>(-alpha_ / 2.0));
            if (target_ == MapSpace::Cos) out.push_back(0.0f);
        } else {
            out.push_back(0.0f);
        }
        return out;
    }

    /// Fails when y falls outside the square-root domain fixed at fit time.
    std::vector<float> apply_db(std::span<const float> y) const {
        require_fitted();
        std::vector<float> out(y.begin(), y.end());
        const double n2 = squared_norm(y.data(), y.size());
        if (source_ == MapSpace::Cos) {
            detail::require_arg(n2 > 0.0, "cosine source requires non-zero database vectors");
            normalize(out);
            return out;
        }
        if (source_ == MapSpace::L2 && target_ == MapSpace::IP) {
            out.push_back(static_cast<float>(n2 / alpha_));
        } else if (source_ == MapSpace::L2 && target_ == MapSpace::Cos) {
            for (float& v : out) v = static_cast<float>(beta_ * v);
            out.push_back(static_cast<float>(beta_ * n2 / alpha_));
            double r = 1.0 - beta_ * beta_ * n2 - beta_ * beta_ * n2 * n2 / (alpha_ * alpha_);
            out.push_back(static_cast<float>(checked_sqrt(r)));
        } else if (source_ == MapSpace::IP && target_ == MapSpace::L2) {
            out.push_back(static_cast<float>(checked_sqrt(alpha_ * alpha_ - n2)));
        } else {
            for (float& v : out) v = static_cast<float>(alpha_ * v);
            out.push_back(static_cast<float>(checked_sqrt(1.0 - alpha_ * alpha_ * n2)));
        }
        return out;
    }

    VectorSet apply_queries(const VectorSet& x) const { return map_all(x, true); }
    VectorSet apply_database(const VectorSet& y) const { return map_all(y, false); }

private:
    void require_fitted() const {
        detail::require(fitted_, ErrorKind::NotTrained, "metric map is not fitted");
    }

    static void normalize(std::vector<float>& v) {
        double n = std::sqrt(static_cast<double>(squared_norm(v.data(), v.size())));
        detail::require_arg(n > 0.0, "cannot normalize a zero vector");
        for (float& x : v) x = static_cast<float>(x / n);
    }

    static double checked_sqrt(double r) {
        if (r < 0.0) {
            throw Error(ErrorKind::InvalidArgument,
                        "vector norm exceeds the bound fixed when the metric map was fitted");
        }
        return std::sqrt(r);
    }

    VectorSet map_all(const VectorSet& x, bool queries) const {
        VectorSet out(x.n, output_dim(x.d));
        for (size_t i = 0; i < x.n; ++i) {
            auto v = queries ? apply_query(x.row(i)) : apply_db(x.row(i));
            std::copy(v.begin(), v.end(), out.ptr(i));
        }
        return out;
    }

    MapSpace source_;
    MapSpace target_;
    double alpha_ = 0.0;
    double beta_ = 0.0;
    bool fitted_ = false;
};

} // namespace vx
