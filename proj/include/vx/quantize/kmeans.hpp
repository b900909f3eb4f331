#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "vx/core/rng.hpp"
#include "vx/flat/flat_index.hpp"
#include "vx/quantize/bits.hpp"
#include "vx/quantize/codec.hpp"

namespace vx {

struct KMeansParams {
    size_t niter = 25;
    bool spherical = false;
    std::uint64_t seed = 1234;
    /// Training points kept per centroid; 0 disables subsampling.
    size_t max_points_per_centroid = 256;
};

struct KMeansResult {
    VectorSet centroids;
    /// Mean squared distance to the assigned centroid, recorded after the
    /// assignment step of every iteration.
    std::vector<double> mse_history;
};

namespace detail {

inline double l2_sqr_f64(const float* x, const float* y, size_t d) {
    double s = 0.0;
    for (size_t j = 0; j < d; ++j) {
        double t = static_cast<double>(x[j]) - static_cast<double>(y[j]);
        s += t * t;
    }
    return s;
}

inline void normalize_inplace(float* v, size_t d) {
    double n = 0.0;
    for (size_t j = 0; j < d; ++j) n += static_cast<double>(v[j]) * v[j];
    n = std::sqrt(n);
    if (n == 0.0) return;
    for (size_t j = 0; j < d; ++j) v[j] = static_cast<float>(v[j] / n);
}

inline VectorSet kmeanspp_init(const VectorSet& x, size_t k, Rng& rng) {
    VectorSet c(k, x.d);
    std::uniform_int_distribution<size_t> pick(0, x.n - 1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    size_t first = pick(rng);
    std::copy(x.ptr(first), x.ptr(first) + x.d, c.ptr(0));
    std::vector<double> dmin(x.n);
    parallel_for(x.n, [&](size_t i) { dmin[i] = l2_sqr_f64(x.ptr(i), c.ptr(0), x.d); });
    for (size_t j = 1; j < k; ++j) {
        double total = std::accumulate(dmin.begin(), dmin.end(), 0.0);
        size_t chosen = 0;
        if (total > 0.0) {
            double target = unif(rng) * total;
            double acc = 0.0;
            chosen = x.n - 1;
            for (size_t i = 0; i < x.n; ++i) {
                acc += dmin[i];
                if (acc > target && dmin[i] > 0.0) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = pick(rng);
        }
        std::copy(x.ptr(chosen), x.ptr(chosen) + x.d, c.ptr(j));
        parallel_for(x.n, [&](size_t i) {
            dmin[i] = std::min(dmin[i], l2_sqr_f64(x.ptr(i), c.ptr(j), x.d));
        });
    }
    return c;
}

inline VectorSet subsample(const VectorSet& x, size_t keep, Rng& rng) {
    std::vector<size_t> perm(x.n);
    std::iota(perm.begin(), perm.end(), size_t{0});
    for (size_t i = 0; i < keep; ++i) {
        std::uniform_int_distribution<size_t> pick(i, x.n - 1);
        std::swap(perm[i], perm[pick(rng)]);
    }
    perm.resize(keep);
    std::sort(perm.begin(), perm.end());
    VectorSet out(keep, x.d);
    for (size_t i = 0; i < keep; ++i) std::copy(x.ptr(perm[i]), x.ptr(perm[i]) + x.d, out.ptr(i));
    return out;
}

/// Nearest row of `c` for each row of x (float search, ties to smaller index).
inline std::vector<idx_t> nearest_centroids(const VectorSet& x, const VectorSet& c) {
    FlatIndex flat(c.d);
    flat.add(c);
    SearchResult r = flat.search(x, 1);
    return r.ids;
}

} // namespace detail

/// Lloyd's algorithm with k-means++ seeding.
///
/// The recorded MSE never increases: a point changes cluster only when the
/// new centroid is strictly closer in double precision, and a centroid update
/// that would raise the objective is rolled back. Empty clusters are reseeded
/// with the farthest point of the largest cluster. With `spherical`, centroids
/// are renormalized after every update.
inline KMeansResult kmeans_train(const VectorSet& input, size_t k, const KMeansParams& params = {},
                                 const VectorSet* init = nullptr) {
    detail::require_arg(k >= 1, "k-means requires K >= 1");
    detail::require_arg(input.n >= k, "k-means requires at least K training points");
    Rng rng(params.seed);
    const size_t d = input.d;

    VectorSet sampled;
    const VectorSet* xp = &input;
    if (params.max_points_per_centroid > 0 && input.n > k * params.max_points_per_centroid) {
        sampled = detail::subsample(input, k * params.max_points_per_centroid, rng);
        xp = &sampled;
    }
    const VectorSet& x = *xp;
    const size_t n = x.n;

    VectorSet c;
    if (init) {
        detail::require_arg(init->n == k && init->d == d, "initial centroids must be K x d");
        c = *init;
    } else {
        c = detail::kmeanspp_init(x, k, rng);
    }
    if (params.spherical) {
        for (size_t j = 0; j < k; ++j) detail::normalize_inplace(c.ptr(j), d);
    }

    KMeansResult result;
    std::vector<idx_t> assign(n, kInvalidId);
    std::vector<double> dist(n, 0.0);
    for (size_t it = 0; it < params.niter; ++it) {
        auto cand = detail::nearest_centroids(x, c);
        parallel_for(n, [&](size_t i) {
            double dn = detail::l2_sqr_f64(x.ptr(i), c.ptr(cand[i]), d);
            if (assign[i] < 0) {
                assign[i] = cand[i];
                dist[i] = dn;
                return;
            }
            double dold = detail::l2_sqr_f64(x.ptr(i), c.ptr(assign[i]), d);
            dist[i] = dold;
            if (dn < dold) {
                assign[i] = cand[i];
                dist[i] = dn;
            }
        });
        double total = 0.0;
        for (size_t i = 0; i < n; ++i) total += dist[i];
        result.mse_history.push_back(total / static_cast<double>(n));

        // Update step.
        std::vector<double> sums(k * d, 0.0);
        std::vector<size_t> counts(k, 0);
        for (size_t i = 0; i < n; ++i) {
            auto a = static_cast<size_t>(assign[i]);
            ++counts[a];
            for (size_t j = 0; j < d; ++j) sums[a * d + j] += x.ptr(i)[j];
        }
        VectorSet next = c;
        for (size_t a = 0; a < k; ++a) {
            if (counts[a] == 0) continue;
            for (size_t j = 0; j < d; ++j) {
                next.ptr(a)[j] = static_cast<float>(sums[a * d + j] / static_cast<double>(counts[a]));
            }
            if (params.spherical) detail::normalize_inplace(next.ptr(a), d);
        }
        std::vector<double> nd(n);
        parallel_for(n, [&](size_t i) { nd[i] = detail::l2_sqr_f64(x.ptr(i), next.ptr(assign[i]), d); });
        double next_total = 0.0;
        for (size_t i = 0; i < n; ++i) next_total += nd[i];
        if (next_total <= total) c = std::move(next);

        // Empty-cluster repair; assigned points are untouched so the
        // objective is unchanged.
        std::vector<bool> taken(n, false);
        for (size_t a = 0; a < k; ++a) {
            if (counts[a] != 0) continue;
            size_t big = static_cast<size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
            size_t far = n;
            double far_d = -1.0;
            for (size_t i = 0; i < n; ++i) {
                if (static_cast<size_t>(assign[i]) != big || taken[i]) continue;
                double di = detail::l2_sqr_f64(x.ptr(i), c.ptr(big), d);
                if (di > far_d) {
                    far_d = di;
                    far = i;
                }
            }
            if (far == n) continue;
            taken[far] = true;
            --counts[big];
            counts[a] = 1;
            std::copy(x.ptr(far), x.ptr(far) + d, c.ptr(a));
            if (params.spherical) detail::normalize_inplace(c.ptr(a), d);
        }
    }
    result.centroids = std::move(c);
    return result;
}

/// Vector quantizer with K centroids; the code is the centroid index.
class KMeansCodec : public Codec {
public:
    KMeansParams params;

    KMeansCodec(size_t d, size_t k, KMeansParams p = {}) : Codec(d), params(p), k_(k) {
        detail::require_arg(k >= 1, "k-means codec requires K >= 1");
    }

    size_t k() const { return k_; }
    size_t code_size() const override { return bytes_for_bits(bits_for(k_)); }
    const VectorSet& centroids() const { return centroids_; }
    const std::vector<double>& mse_history() const { return mse_history_; }

    void train(const VectorSet& x) override {
        detail::require_dim(x.d, d_, "KMeansCodec::train");
        auto r = kmeans_train(x, k_, params);
        centroids_ = std::move(r.centroids);
        mse_history_ = std::move(r.mse_history);
        is_trained_ = true;
    }

    void set_centroids(VectorSet c) {
        detail::require_arg(c.n == k_ && c.d == d_, "centroids must be K x d");
        centroids_ = std::move(c);
        is_trained_ = true;
    }

    size_t assign_one(const float* x) const {
        size_t best = 0;
        float bd = std::numeric_limits<float>::infinity();
        for (size_t j = 0; j < k_; ++j) {
            float dj = l2_sqr(x, centroids_.ptr(j), d_);
            if (dj < bd) {
                bd = dj;
                best = j;
            }
        }
        return best;
    }

    void encode_one(const float* x, std::uint8_t* code) const override {
        BitWriter(code).write(assign_one(x), bits_for(k_));
    }

    void decode_one(const std::uint8_t* code, float* x) const override {
        auto j = std::min<std::uint64_t>(BitReader(code).read(bits_for(k_)), k_ - 1);
        std::copy(centroids_.ptr(j), centroids_.ptr(j) + d_, x);
    }

    void write(ByteWriter& w) const override {
        w.section("KMNS", [&](ByteWriter& s) {
            s.put<std::uint64_t>(d_);
            s.put<std::uint64_t>(k_);
            s.put<std::uint8_t>(params.spherical ? 1 : 0);
            s.put<std::uint64_t>(params.niter);
            s.put<std::uint64_t>(params.seed);
            s.put<std::uint64_t>(params.max_points_per_centroid);
            s.put<std::uint8_t>(is_trained_ ? 1 : 0);
            s.put_vector(centroids_.data);
        });
    }

    static std::unique_ptr<KMeansCodec> read_body(ByteReader& r) {
        auto d = r.get<std::uint64_t>();
        auto k = r.get<std::uint64_t>();
        KMeansParams p;
        p.spherical = r.get<std::uint8_t>() != 0;
        p.niter = r.get<std::uint64_t>();
        p.seed = r.get<std::uint64_t>();
        p.max_points_per_centroid = r.get<std::uint64_t>();
        bool trained = r.get<std::uint8_t>() != 0;
        auto data = r.get_vector<float>();
        auto c = std::make_unique<KMeansCodec>(d, k, p);
        if (trained) {
            if (data.size() != d * k) throw Error(ErrorKind::Format, "k-means centroid payload size mismatch");
            c->set_centroids(VectorSet(k, d, std::move(data)));
        }
        return c;
    }

    std::string type_name() const override { return "KMeansCodec"; }

private:
    size_t k_;
    VectorSet centroids_;
    std::vector<double> mse_history_;
};

} // namespace vx
