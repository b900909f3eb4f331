#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "vx/core/metric.hpp"
#include "vx/core/rng.hpp"
#include "vx/core/types.hpp"
#include "vx/flat/flat_index.hpp"

namespace vx {

enum class SynthKind { Gaussian, Uniform, Blobs, SkewedNormMips };

inline SynthKind parse_synth_kind(const std::string& s) {
    if (s == "gaussian") return SynthKind::Gaussian;
    if (s == "uniform") return SynthKind::Uniform;
    if (s == "blobs") return SynthKind::Blobs;
    if (s == "skewed-norm-mips" || s == "mips") return SynthKind::SkewedNormMips;
    throw Error(ErrorKind::InvalidArgument, "unknown dataset kind '" + s + "'");
}

struct SynthParams {
    size_t nq = 1000;
    size_t ntrain = 0;          // 0: train on the base vectors
    size_t nblobs = 16;
    float blob_separation = 10.0f;  // std-dev of blob centers per coordinate
    float blob_noise = 1.0f;
    float norm_sigma = 1.0f;    // log-normal sigma of database norms
};

struct Dataset {
    VectorSet base;
    VectorSet queries;
    VectorSet train;
    Metric metric = Metric::l2();
    /// Exact neighbors of the queries (filled by compute_ground_truth).
    SearchResult ground_truth;
    /// Blob id of every base vector and the blob centers (blobs only).
    std::vector<idx_t> labels;
    VectorSet centers;
};

namespace detail {

template <class F>
VectorSet fill(size_t n, size_t d, std::uint64_t seed, F&& draw) {
    VectorSet x(n, d);
    Rng rng(seed);
    for (size_t i = 0; i < n; ++i) draw(rng, x.ptr(i));
    return x;
}

} // namespace detail

/// Deterministic per (kind, n, d, seed, params). Base, query and train
/// splits use independent streams.
inline Dataset synth_dataset(SynthKind kind, size_t n, size_t d, std::uint64_t seed, const SynthParams& p = {}) {
    detail::require_arg(n >= 1 && d >= 1, "dataset needs n >= 1 and d >= 1");
    Dataset ds;
    const size_t ntrain = p.ntrain;
    std::normal_distribution<float> g(0.0f, 1.0f);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    switch (kind) {
        case SynthKind::Gaussian: {
            auto draw = [&](Rng& r, float* v) { for (size_t j = 0; j < d; ++j) v[j] = g(r); };
            ds.base = detail::fill(n, d, mix_seed(seed, 0), draw);
            ds.queries = detail::fill(p.nq, d, mix_seed(seed, 1), draw);
            if (ntrain) ds.train = detail::fill(ntrain, d, mix_seed(seed, 2), draw);
            break;
        }
        case SynthKind::Uniform: {
            auto draw = [&](Rng& r, float* v) { for (size_t j = 0; j < d; ++j) v[j] = u(r); };
            ds.base = detail::fill(n, d, mix_seed(seed, 0), draw);
            ds.queries = detail::fill(p.nq, d, mix_seed(seed, 1), draw);
            if (ntrain) ds.train = detail::fill(ntrain, d, mix_seed(seed, 2), draw);
            break;
        }
        case SynthKind::Blobs: {
            detail::require_arg(p.nblobs >= 1, "blobs need at least one center");
            ds.centers = detail::fill(p.nblobs, d, mix_seed(seed, 3), [&](Rng& r, float* v) {
                for (size_t j = 0; j < d; ++j) v[j] = p.blob_separation * g(r);
            });
            auto make = [&](size_t m, std::uint64_t s, std::vector<idx_t>* labels) {
                VectorSet x(m, d);
                Rng r(s);
                std::uniform_int_distribution<size_t> pick(0, p.nblobs - 1);
                for (size_t i = 0; i < m; ++i) {
                    size_t c = pick(r);
                    if (labels) labels->push_back(static_cast<idx_t>(c));
                    for (size_t j = 0; j < d; ++j) x.ptr(i)[j] = ds.centers.ptr(c)[j] + p.blob_noise * g(r);
                }
                return x;
            };
            ds.base = make(n, mix_seed(seed, 0), &ds.labels);
            ds.queries = make(p.nq, mix_seed(seed, 1), nullptr);
            if (ntrain) ds.train = make(ntrain, mix_seed(seed, 2), nullptr);
            break;
        }
        case SynthKind::SkewedNormMips: {
            ds.metric = Metric::inner_product();
            std::normal_distribution<float> ln(0.0f, p.norm_sigma);
            auto direction = [&](Rng& r, float* v) {
                double s = 0.0;
                for (size_t j = 0; j < d; ++j) {
                    v[j] = g(r);
                    s += static_cast<double>(v[j]) * v[j];
                }
                float inv = s > 0.0 ? static_cast<float>(1.0 / std::sqrt(s)) : 0.0f;
                for (size_t j = 0; j < d; ++j) v[j] *= inv;
            };
            auto scaled = [&](Rng& r, float* v) {
                direction(r, v);
                float norm = std::exp(ln(r));
                for (size_t j = 0; j < d; ++j) v[j] *= norm;
            };
            ds.base = detail::fill(n, d, mix_seed(seed, 0), scaled);
            ds.queries = detail::fill(p.nq, d, mix_seed(seed, 1), direction);
            if (ntrain) ds.train = detail::fill(ntrain, d, mix_seed(seed, 2), scaled);
            break;
        }
    }
    if (!ntrain) ds.train = ds.base;
    return ds;
}

/// Exact k-NN of the queries by flat search.
inline SearchResult compute_ground_truth(const VectorSet& base, const VectorSet& queries, size_t k, Metric metric) {
    FlatIndex flat(base.d, metric);
    flat.add(base);
    return flat.search(queries, std::min(k, std::max<size_t>(base.n, 1)));
}

inline void attach_ground_truth(Dataset& ds, size_t k = 100) {
    ds.ground_truth = compute_ground_truth(ds.base, ds.queries, k, ds.metric);
}

/// Standard deviation over mean of the row norms.
inline double norm_coefficient_of_variation(const VectorSet& x) {
    detail::require_arg(x.n >= 2, "need at least two vectors");
    std::vector<double> norms(x.n);
    double mean = 0.0;
    for (size_t i = 0; i < x.n; ++i) {
        double s = 0.0;
        for (size_t j = 0; j < x.d; ++j) s += static_cast<double>(x.ptr(i)[j]) * x.ptr(i)[j];
        norms[i] = std::sqrt(s);
        mean += norms[i];
    }
    mean /= static_cast<double>(x.n);
    double var = 0.0;
    for (double v : norms) var += (v - mean) * (v - mean);
    var /= static_cast<double>(x.n - 1);
    return std::sqrt(var) / mean;
}

} // namespace vx
